use std::io::Write as _;
use std::path::{Path, PathBuf};

use eamkit::cft::{
    interval_entropy_cft, interval_entropy_integral, power_law_exponent, IntervalSpec,
};
use eamkit::contour::{compare_contours, contour_freefermion, contour_from_eam, ContourVector};
use eamkit::eamfit::{fit_eam, EntanglementAdjacency, FitReport};
use eamkit::entropy::{EntropyTable, SubsetMask};
use eamkit::formats::{
    contour_to_csv, eam_json_value, eam_to_csv, eam_to_json, entropy_table_from_str,
    entropy_table_to_csv, entropy_table_to_json, round_sig, state_to_csv,
};
use eamkit::LN2;
use log::info;
use serde_json::json;

use crate::args::{
    CftArgs, ContourArgs, EngineChoice, EntropiesArgs, FitArgs, Format, ModelArgs, ModelKind,
    Route, StateDumpArgs,
};
use crate::error::CliError;
use crate::model::ModelConfig;

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Context {
    pub timestamp: Option<String>,
    pub bits: bool,
}

impl Context {
    fn ts(&self) -> Option<&str> {
        self.timestamp.as_deref()
    }

    /// Renders an entropy for stderr summaries in the requested unit.
    fn show(&self, nats: f64) -> String {
        if self.bits {
            format!("{:.6} bits", nats / LN2)
        } else {
            format!("{nats:.6} nats")
        }
    }
}

/// Writes to `path` through a temporary sibling file, or to stdout.
pub fn emit(path: Option<&Path>, content: &str) -> Result<(), CliError> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(content.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| CliError::Io(format!("stdout: {e}")));
    };
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(io_err)?;
    tmp.write_all(content.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn resolve_format(explicit: Option<Format>, path: Option<&Path>, default: Format) -> Format {
    explicit.unwrap_or_else(
        || match path.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => default,
        },
    )
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

pub fn entropies(args: &EntropiesArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ModelConfig::from_args(&args.model)?;
    let table = config.entropy_table()?;
    let half = table.get(SubsetMask::prefix(config.n / 2));
    eprintln!(
        "{}: {} masks, half-chain entropy {}",
        config.descriptor(),
        table.entropies().len(),
        ctx.show(half)
    );
    let path = args.out.output.as_deref();
    let text = match resolve_format(args.out.format, path, Format::Csv) {
        Format::Csv => entropy_table_to_csv(&table, ctx.ts()),
        Format::Json => entropy_table_to_json(&table, ctx.ts()),
    };
    emit(path, &text)
}

/// A table computed in memory, rounded the way a written file would be, so
/// that fitting a model and fitting its saved table agree bit for bit.
fn quantized_table(config: &ModelConfig) -> Result<EntropyTable, CliError> {
    let table = config.entropy_table()?;
    let rounded = table.entropies().iter().map(|&s| round_sig(s)).collect();
    Ok(EntropyTable::new(
        table.n_sites(),
        rounded,
        table.engine(),
        table.model(),
    )?)
}

fn read_table(path: &Path) -> Result<EntropyTable, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    entropy_table_from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn model_requested(args: &ModelArgs) -> bool {
    args.model.is_some()
}

pub fn fit(args: &FitArgs, ctx: &Context) -> Result<(), CliError> {
    let table = match (&args.table, model_requested(&args.model)) {
        (Some(path), false) => read_table(path)?,
        (None, true) => quantized_table(&ModelConfig::from_args(&args.model)?)?,
        (None, false) => return Err(CliError::Usage("fit needs --model or --table".into())),
        (Some(_), true) => {
            return Err(CliError::Usage(
                "--table and --model are mutually exclusive".into(),
            ))
        }
    };
    let (eam, report) = fit_eam(&table, args.offset)?;
    summarize_fit(&eam, &report, ctx);

    let path = args.out.output.as_deref();
    let format = resolve_format(args.out.format, path, Format::Json);
    let report_json = pretty(&serde_json::to_value(&report).expect("serializable"));
    match (path, format) {
        (None, Format::Json) => {
            emit(
                None,
                &pretty(&json!({ "eam": eam_json_value(&eam), "report": report })),
            )?;
            if let Some(rp) = &args.report {
                emit(Some(rp), &report_json)?;
            }
            Ok(())
        }
        (path, format) => {
            let body = match format {
                Format::Json => eam_to_json(&eam),
                Format::Csv => eam_to_csv(&eam, ctx.ts()),
            };
            emit(path, &body)?;
            let report_path = args
                .report
                .clone()
                .or_else(|| path.map(|p| with_suffix(p, ".report.json")));
            match report_path {
                Some(rp) => emit(Some(&rp), &report_json),
                None => emit(None, &report_json),
            }
        }
    }
}

fn summarize_fit(eam: &EntanglementAdjacency, report: &FitReport, ctx: &Context) {
    let offset = eam
        .s0()
        .map_or_else(String::new, |s0| format!(", s0 {}", ctx.show(s0)));
    eprintln!(
        "fit over {} equations: error {}, max residual {}{offset}{}",
        report.n_equations,
        ctx.show(report.error),
        ctx.show(report.max_residual),
        if report.rank_deficient {
            " (rank deficient, minimum-norm solution)"
        } else {
            ""
        }
    );
}

fn contour_mask(args: &ContourArgs, n: usize) -> Result<SubsetMask, CliError> {
    let mask = match args.mask {
        Some(bits) => SubsetMask(bits),
        None => SubsetMask::prefix(n / 2),
    };
    if !mask.is_valid(n) || mask.is_trivial(n) {
        return Err(CliError::Usage(format!(
            "mask {} is not a proper nonempty block of {n} sites",
            mask.bits()
        )));
    }
    Ok(mask)
}

pub fn contour(args: &ContourArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ModelConfig::from_args(&args.model)?;
    let mask = contour_mask(args, config.n)?;
    let needs_ff = matches!(args.route, Route::Freefermion | Route::Both);
    if needs_ff && config.kind != ModelKind::Freefermion {
        return Err(CliError::Usage(format!(
            "route {:?} needs --model freefermion (got {:?})",
            args.route, config.kind
        )));
    }

    let eam_contour = |config: &ModelConfig| -> Result<ContourVector, CliError> {
        let (eam, report) = fit_eam(&quantized_table(config)?, args.offset)?;
        summarize_fit(&eam, &report, ctx);
        Ok(contour_from_eam(&eam, mask)?)
    };
    let model = config.descriptor();
    let describe = |c: &ContourVector| {
        eprintln!(
            "{} contour of mask {}: total {}",
            c.route,
            mask.bits(),
            ctx.show(c.total())
        );
    };

    match args.route {
        Route::Eam => {
            let c = eam_contour(&config)?;
            describe(&c);
            emit(
                args.output.as_deref(),
                &contour_to_csv(&c, &model, ctx.ts()),
            )
        }
        Route::Freefermion => {
            let c = contour_freefermion(&config.freefermion()?, mask)?;
            describe(&c);
            emit(
                args.output.as_deref(),
                &contour_to_csv(&c, &model, ctx.ts()),
            )
        }
        Route::Both => {
            let a = eam_contour(&config)?;
            let b = contour_freefermion(&config.freefermion()?, mask)?;
            describe(&a);
            describe(&b);
            let cmp = compare_contours(&a, &b)?;
            eprintln!(
                "pearson {:.6}, normalized L1 {:.6}",
                cmp.pearson, cmp.normalized_l1
            );
            let cmp_json = pretty(&serde_json::to_value(&cmp).expect("serializable"));
            let a_csv = contour_to_csv(&a, &model, ctx.ts());
            let b_csv = contour_to_csv(&b, &model, ctx.ts());
            match &args.output {
                Some(stem) => {
                    emit(Some(&with_suffix(stem, ".eam.csv")), &a_csv)?;
                    emit(Some(&with_suffix(stem, ".freefermion.csv")), &b_csv)?;
                    emit(Some(&with_suffix(stem, ".comparison.json")), &cmp_json)
                }
                None => emit(None, &format!("{a_csv}{b_csv}{cmp_json}")),
            }
        }
    }
}

pub fn cft_check(args: &CftArgs) -> Result<(), CliError> {
    let value = if args.lattice {
        let model = ModelArgs {
            model: Some(ModelKind::Freefermion),
            n: Some(args.n),
            matching: None,
            dimerized: 0.0,
            aniso: 1.0,
            boundary: Some(crate::args::BoundaryArg::Open),
            filling: None,
            engine: EngineChoice::Freefermion,
        };
        let table = ModelConfig::from_args(&model)?.entropy_table()?;
        let (eam, _) = fit_eam(&table, false)?;
        let fit = power_law_exponent(&eam, args.min_sep, args.max_sep)?;
        eprintln!("exponent {:.6} (r2 {:.4})", fit.exponent, fit.r2);
        serde_json::to_value(&fit).expect("serializable")
    } else {
        let (u, v, eps) = match (args.u, args.v, args.eps) {
            (Some(u), Some(v), Some(eps)) => (u, v, eps),
            _ => return Err(CliError::Usage("--u, --v and --eps are required".into())),
        };
        let spec = IntervalSpec::new(u, v, eps, args.c)?;
        let integral = interval_entropy_integral(&spec)?;
        let closed_form = interval_entropy_cft(&spec);
        let length = v - u;
        json!({
            "integral": integral,
            "closed_form": closed_form,
            "gap": closed_form - integral,
            "expected_gap": args.c / 3.0 * (length / (length - eps)).ln(),
        })
    };
    emit(args.output.as_deref(), &pretty(&value))
}

pub fn state_dump(args: &StateDumpArgs, ctx: &Context) -> Result<(), CliError> {
    let config = ModelConfig::from_args(&args.model)?;
    let state = config.state()?;
    emit(
        args.output.as_deref(),
        &state_to_csv(&state, &config.descriptor(), ctx.ts()),
    )
}
