use std::io::Write;

use crate::args::BenchArgs;
use crate::bench::{run_bench, BenchOptions};
use crate::error::{CliError, Result};

use super::{emit, emit_json};

fn parse_etas(list: &[String]) -> Result<Vec<Option<f64>>> {
    list.iter()
        .map(|s| match s.trim() {
            "none" => Ok(None),
            v => match v.parse::<f64>() {
                Ok(x) if x.is_finite() && x > 0.0 => Ok(Some(x)),
                _ => Err(CliError::Usage(format!("bad cut-off threshold '{v}'"))),
            },
        })
        .collect()
}

pub fn run(args: &BenchArgs, out: &mut impl Write) -> Result<()> {
    let opts = BenchOptions {
        trials: args.trials,
        signal_len: args.signal_len,
        rir_len: args.rir_len,
        t60: args.t60,
        mics: args.mics,
        etas: parse_etas(&args.eta_list)?,
        include_direct: args.include_direct,
        backend: args.backend.into(),
        seed: args.seed,
        ..Default::default()
    };
    if opts.signal_len == 0 || opts.rir_len == 0 {
        return Err(CliError::Usage("signal and RIR lengths must be positive".into()));
    }
    let report = run_bench(&opts)?;
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, text)
            .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    if args.json {
        emit_json(out, &report)
    } else {
        emit(out, report.to_table().trim_end())
    }
}
