use std::io::Write;

use roomsim_core::convolution::{
    cost_direct, cost_full_fft, cost_ola, full_fft_size, ola_block_count, plan, ConvolutionPlan,
    CostInputs,
};
use serde::{Deserialize, Serialize};

use super::{emit, emit_json};
use crate::args::CostArgs;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlaRow {
    pub fft_size: usize,
    pub blocks: usize,
    pub cost: f64,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub inputs: CostInputs,
    pub direct: f64,
    pub full_fft_size: usize,
    pub full_fft: f64,
    pub ola: Vec<OlaRow>,
    pub best: ConvolutionPlan,
}

pub fn cost_report(inputs: &CostInputs) -> roomsim_core::Result<CostReport> {
    let best = plan(inputs)?;
    let full_size = full_fft_size(inputs.signal_len, inputs.rir_len);
    let mut ola = Vec::new();
    let mut n = inputs.rir_len.next_power_of_two().max(2);
    while n <= full_size {
        ola.push(OlaRow {
            fft_size: n,
            blocks: ola_block_count(inputs.signal_len, n, inputs.rir_len)?,
            cost: cost_ola(inputs, n)?,
            best: false,
        });
        n *= 2;
    }
    if best.strategy == roomsim_core::Strategy::OverlapAdd {
        if let Some(row) = ola.iter_mut().find(|r| Some(r.fft_size) == best.fft_size) {
            row.best = true;
        }
    }
    Ok(CostReport {
        inputs: *inputs,
        direct: cost_direct(inputs)?,
        full_fft_size: full_size,
        full_fft: cost_full_fft(inputs, full_size)?,
        ola,
        best,
    })
}

fn sci(v: f64) -> String {
    format!("{v:.6e}")
}

pub fn render_table(r: &CostReport) -> String {
    let mut s = String::new();
    let c = &r.inputs;
    s += &format!(
        "I = {}, J = {}, N_x = {}, N_h = {}\n",
        c.num_sources, c.num_mics, c.signal_len, c.rir_len
    );
    s += &format!("direct              C_td  = {}\n", sci(r.direct));
    let mark = if r.best.strategy == roomsim_core::Strategy::FullFft { " *" } else { "" };
    s += &format!(
        "full FFT (N = 2^{:<2}) C_FFT = {}{mark}\n",
        r.full_fft_size.trailing_zeros(),
        sci(r.full_fft)
    );
    s += "overlap-add:\n";
    s += &format!("  {:>10} {:>8} {:>14}\n", "N", "blocks", "C_OLA");
    for row in &r.ola {
        s += &format!(
            "  {:>10} {:>8} {:>14}{}\n",
            format!("2^{}", row.fft_size.trailing_zeros()),
            row.blocks,
            sci(row.cost),
            if row.best { " *" } else { "" }
        );
    }
    s += &format!(
        "best: {} at N = {}, {} multiplications",
        r.best.strategy,
        r.best.fft_size.unwrap_or(0),
        sci(r.best.predicted_cost)
    );
    s
}

pub fn run(args: &CostArgs, out: &mut impl Write) -> Result<()> {
    let inputs = CostInputs::new(
        args.sources,
        args.mics,
        args.signal_len as usize,
        args.rir_len as usize,
    )?;
    let report = cost_report(&inputs)?;
    if args.json {
        emit_json(out, &report)
    } else {
        emit(out, render_table(&report))
    }
}
