//! Command line front end. Every command prints its artifact to stdout;
//! `--out` additionally writes the same bytes to a file.
//!
//! Exit codes: 0 success, 2 precondition failure (stdout carries a one-line
//! `{"error", "kind"}` object), 3 numerical flag (unreliable ranks, an
//! inconclusive certificate, a spectra mismatch, a truncated family).

use clap::{Parser, Subcommand, ValueEnum};
use isospec::jmap::{
    self, deformation_dims, generate_family, is_isospectral, nonequiv_certificate, sample_jmap,
    JMap, Verdict, DEFORM_RANK_TOL, ISOSPEC_TOL,
};
use isospec::liealg::{build_algebra, embedding, Family};
use isospec::metric::build_metric;
use isospec::pipeline::{run_pipeline, PipelineConfig};
use isospec::potentials::{
    double_jmap, doubled_genericity, potential_invariance_suite, Potential,
    SymplecticBlockLayout,
};
use isospec::report::{
    algebra_to_json, certificate_to_json, config_hash, family_to_json, jmap_from_json,
    jmap_to_json, metric_to_json, spectra_from_csv, spectra_to_csv, suite_to_json,
    to_pretty_json, SpectrumProvenance,
};
use isospec::spectra::{compare_spectra, defining_rep, tensor_square_rep, SpectrumMultiset};
use isospec::{Error, Result};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

const EXIT_OK: u8 = 0;
const EXIT_PRECONDITION: u8 = 2;
const EXIT_FLAG: u8 = 3;

#[derive(Parser)]
#[command(
    name = "isospec",
    version,
    about = "isospectral deformations of compact group metrics: sampling, invariants, spectra, certificates"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepChoice {
    Defining,
    Square,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a structured basis and print its residuals
    Algebra {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
    },
    /// Draw a seeded deformation map and print it as JSON
    JmapSample {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the invariant forms of two maps
    CheckIsospec {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = ISOSPEC_TOL)]
        tol: f64,
    },
    /// Tangent dimension counts for a map's isospectral variety
    Dims {
        #[arg(long, conflicts_with_all = ["family", "n", "seed"])]
        r#in: Option<PathBuf>,
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFORM_RANK_TOL)]
        rank_tol: f64,
    },
    /// Continue a seeded map into a lattice of isospectral deformations
    Deform {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, alias = "params", default_value_t = 1)]
        num_params: usize,
        #[arg(long, alias = "steps", default_value_t = 2)]
        num_steps: usize,
        #[arg(long, default_value_t = 0.05)]
        step_size: f64,
        #[arg(long, default_value_t = DEFORM_RANK_TOL)]
        rank_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search trace words for a margin separating two maps
    Certify {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 6)]
        word_len: usize,
        #[arg(long, default_value_t = 720)]
        grid: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Left-invariant metric induced on the ambient group
    Metric {
        #[arg(long)]
        r#in: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Laplace block spectra of the induced metric, as CSV
    Spectrum {
        #[arg(long)]
        r#in: PathBuf,
        #[arg(long, value_enum, default_value_t = RepChoice::Defining)]
        rep: RepChoice,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diff two spectrum archives level by level
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        /// Compare even when the provenance headers disagree
        #[arg(long)]
        force: bool,
    },
    /// Invariance checks for the doubled symplectic potential
    PotentialSuite {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 2.0)]
        c1: f64,
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
        /// Map for the A block; defaults to a seeded sample
        #[arg(long)]
        a: Option<PathBuf>,
        /// Map for the E block; defaults to a conjugate of the A map
        #[arg(long)]
        e: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        map_seed: u64,
        #[arg(long, default_value_t = 7)]
        suite_seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Family, spectra, certificates and summary in one run
    Pipeline {
        #[arg(long, default_value = "so")]
        family: String,
        #[arg(long, default_value_t = 5)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, alias = "params", default_value_t = 2)]
        num_params: usize,
        #[arg(long, alias = "steps", default_value_t = 1)]
        num_steps: usize,
        #[arg(long, default_value_t = 0.05)]
        step_size: f64,
        #[arg(long, default_value_t = DEFORM_RANK_TOL)]
        rank_tol: f64,
        #[arg(long, default_value_t = 3)]
        cert_pairs: usize,
        #[arg(long, default_value_t = 6)]
        cert_word_len: usize,
        #[arg(long, default_value_t = 360)]
        cert_grid: usize,
        #[arg(long, default_value_t = 1e-6)]
        cert_tol: f64,
        /// Also run the tensor-square block
        #[arg(long)]
        tensor_square: bool,
        #[arg(long, default_value_t = 1e-8)]
        compare_rel_tol: f64,
        /// Directory for family.json, spectra.csv, certificates.json, summary.json
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            println!(
                "{}",
                serde_json::json!({ "error": e.to_string(), "kind": error_kind(&e) })
            );
            ExitCode::from(EXIT_PRECONDITION)
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Invalid(_) => "invalid",
        Error::AlgebraMismatch(_) => "algebra-mismatch",
        Error::Membership(_) => "membership",
        Error::NotIsospectral(_) => "not-isospectral",
        Error::MultiplicityMismatch(_, _) => "multiplicity-mismatch",
        Error::BudgetExceeded { .. } => "budget-exceeded",
        Error::Numerical(_) => "numerical",
        Error::Provenance(_) => "provenance",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    print!("{text}");
    if !text.ends_with('\n') {
        println!();
    }
    if let Some(p) = out {
        fs::write(p, text)?;
    }
    Ok(())
}

fn load_jmap(path: &Path) -> Result<JMap> {
    let text = fs::read_to_string(path)?;
    jmap_from_json(&serde_json::from_str(&text)?)
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Algebra { family, n } => {
            let alg = build_algebra(Family::from_str(&family)?, n)?;
            let v = alg.validate();
            let out = serde_json::json!({
                "algebra": algebra_to_json(&alg),
                "validation": &v,
                "max_residual": v.max_residual(),
            });
            emit(&format!("{}\n", serde_json::to_string_pretty(&out)?), None)?;
            Ok(EXIT_OK)
        }
        Cmd::JmapSample {
            family,
            n,
            seed,
            out,
        } => {
            let alg = build_algebra(Family::from_str(&family)?, n)?;
            let j = sample_jmap(&alg, seed);
            emit(&to_pretty_json(&jmap_to_json(&j))?, out.as_deref())?;
            Ok(EXIT_OK)
        }
        Cmd::CheckIsospec { a, b, tol } => {
            let check = is_isospectral(&load_jmap(&a)?, &load_jmap(&b)?, tol)?;
            emit(&to_pretty_json(&check)?, None)?;
            Ok(if check.isospectral { EXIT_OK } else { EXIT_FLAG })
        }
        Cmd::Dims {
            r#in,
            family,
            n,
            seed,
            rank_tol,
        } => {
            let j = match (r#in, family, n, seed) {
                (Some(path), _, _, _) => load_jmap(&path)?,
                (None, Some(f), Some(n), Some(s)) => {
                    sample_jmap(&build_algebra(Family::from_str(&f)?, n)?, s)
                }
                _ => {
                    return Err(Error::Invalid(
                        "dims needs --in, or all of --family --n --seed".into(),
                    ))
                }
            };
            let dims = deformation_dims(&j, rank_tol)?;
            emit(&to_pretty_json(&dims)?, None)?;
            Ok(if dims.flagged { EXIT_FLAG } else { EXIT_OK })
        }
        Cmd::Deform {
            family,
            n,
            seed,
            num_params,
            num_steps,
            step_size,
            rank_tol,
            out,
        } => {
            let alg = build_algebra(Family::from_str(&family)?, n)?;
            let base = sample_jmap(&alg, seed);
            let fam = generate_family(&base, num_params, num_steps, step_size, rank_tol)?;
            emit(&to_pretty_json(&family_to_json(&fam, rank_tol)?)?, out.as_deref())?;
            Ok(if fam.truncated { EXIT_FLAG } else { EXIT_OK })
        }
        Cmd::Certify {
            a,
            b,
            word_len,
            grid,
            tol,
            out,
        } => {
            let cert =
                nonequiv_certificate(&load_jmap(&a)?, &load_jmap(&b)?, word_len, grid, tol)?;
            let json = certificate_to_json(&cert, &label_of(&a), &label_of(&b))?;
            emit(&to_pretty_json(&json)?, out.as_deref())?;
            Ok(match cert.verdict {
                Verdict::Nonequivalent => EXIT_OK,
                Verdict::Inconclusive => EXIT_FLAG,
            })
        }
        Cmd::Metric { r#in, out } => {
            let j = load_jmap(&r#in)?;
            let emb = embedding(j.algebra.family, j.algebra.n)?;
            let (_, metric) = build_metric(&j, &emb)?;
            emit(&to_pretty_json(&metric_to_json(&j, &metric)?)?, out.as_deref())?;
            Ok(EXIT_OK)
        }
        Cmd::Spectrum { r#in, rep, out } => {
            let j = load_jmap(&r#in)?;
            let emb = embedding(j.algebra.family, j.algebra.n)?;
            let (_, metric) = build_metric(&j, &emb)?;
            let mut specs = Vec::new();
            if matches!(rep, RepChoice::Defining | RepChoice::Both) {
                specs.push(isospec::spectra::laplace_block_spectrum(
                    &metric,
                    &defining_rep(&emb.ambient),
                )?);
            }
            if matches!(rep, RepChoice::Square | RepChoice::Both) {
                specs.push(isospec::spectra::laplace_block_spectrum(
                    &metric,
                    &tensor_square_rep(&emb.ambient)?,
                )?);
            }
            let prov = SpectrumProvenance {
                config_hash: config_hash(&jmap_to_json(&j))?,
                seed: j.seed,
                family: j.algebra.family.label().into(),
                inner_n: j.algebra.n,
                ambient_n: emb.ambient.n,
            };
            let refs: Vec<&SpectrumMultiset> = specs.iter().collect();
            emit(&spectra_to_csv(&prov, &refs), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Cmd::Compare {
            a,
            b,
            rel_tol,
            force,
        } => {
            let (prov_a, specs_a) = spectra_from_csv(&fs::read_to_string(&a)?)?;
            let (prov_b, specs_b) = spectra_from_csv(&fs::read_to_string(&b)?)?;
            let compatible = prov_a.family == prov_b.family
                && prov_a.inner_n == prov_b.inner_n
                && prov_a.ambient_n == prov_b.ambient_n;
            if !compatible && !force {
                return Err(Error::Provenance(format!(
                    "archives describe different settings ({}/{} vs {}/{}); pass --force to compare anyway",
                    prov_a.family, prov_a.ambient_n, prov_b.family, prov_b.ambient_n
                )));
            }
            let mut rows = Vec::new();
            let mut all_within = true;
            for sa in &specs_a {
                let sb = specs_b
                    .iter()
                    .find(|s| s.rep_label == sa.rep_label)
                    .ok_or_else(|| {
                        Error::Provenance(format!("second archive lacks rep {}", sa.rep_label))
                    })?;
                let tol = rel_tol * sa.op_norm;
                let disc = compare_spectra(sa, sb, tol)?;
                let within = disc < tol;
                all_within &= within;
                rows.push(serde_json::json!({
                    "rep_label": sa.rep_label,
                    "discrepancy": if disc.is_finite() {
                        serde_json::json!(disc)
                    } else {
                        serde_json::json!("infinite")
                    },
                    "tol": tol,
                    "within_tol": within,
                }));
            }
            let out = serde_json::json!({
                "provenance_compatible": compatible,
                "config_hash_match": prov_a.config_hash == prov_b.config_hash,
                "rows": rows,
                "all_within_tol": all_within,
            });
            emit(&format!("{}\n", serde_json::to_string_pretty(&out)?), None)?;
            Ok(if all_within { EXIT_OK } else { EXIT_FLAG })
        }
        Cmd::PotentialSuite {
            n,
            r,
            c1,
            c2,
            a,
            e,
            map_seed,
            suite_seed,
            samples,
            tol,
            out,
        } => {
            let j_a = match a {
                Some(path) => load_jmap(&path)?,
                None => sample_jmap(&build_algebra(Family::Symplectic, n)?, map_seed),
            };
            let j_e = match e {
                Some(path) => load_jmap(&path)?,
                None => jmap::conjugated(&j_a, map_seed + 1),
            };
            let layout = SymplecticBlockLayout::new(j_a.algebra.n, r)?;
            let generic = doubled_genericity(&j_a, &j_e).generic();
            let sys = double_jmap(&j_a, &j_e, layout)?;
            let p = Potential::new(c1, c2, layout)?;
            let report = potential_invariance_suite(&p, &sys, samples, suite_seed)?;
            let json = suite_to_json(&p, &report)?;
            let doc = serde_json::json!({
                "suite": json,
                "doubled_generic": generic,
            });
            emit(
                &format!("{}\n", serde_json::to_string_pretty(&doc)?),
                out.as_deref(),
            )?;
            Ok(if report.max_violation() <= tol && generic {
                EXIT_OK
            } else {
                EXIT_FLAG
            })
        }
        Cmd::Pipeline {
            family,
            n,
            seed,
            num_params,
            num_steps,
            step_size,
            rank_tol,
            cert_pairs,
            cert_word_len,
            cert_grid,
            cert_tol,
            tensor_square,
            compare_rel_tol,
            out_dir,
        } => {
            let cfg = PipelineConfig {
                family: Family::from_str(&family)?,
                n,
                seed,
                num_params,
                num_steps,
                step_size,
                rank_tol,
                cert_pairs,
                cert_word_len,
                cert_grid,
                cert_tol,
                tensor_square,
                compare_rel_tol,
            };
            let artifacts = run_pipeline(&cfg)?;
            if let Some(dir) = &out_dir {
                fs::create_dir_all(dir)?;
                fs::write(dir.join("family.json"), &artifacts.family_json)?;
                fs::write(dir.join("spectra.csv"), &artifacts.spectra_csv)?;
                fs::write(dir.join("certificates.json"), &artifacts.certificates_json)?;
                fs::write(dir.join("summary.json"), &artifacts.summary_json)?;
            }
            emit(&artifacts.summary_json, None)?;
            let summary: serde_json::Value = serde_json::from_str(&artifacts.summary_json)?;
            let healthy = summary["all_pairs_nonequivalent"] == true
                && summary["all_spectra_match"] == true
                && summary["truncated"] == false
                && summary["dims"]["flagged"] == false;
            Ok(if healthy { EXIT_OK } else { EXIT_FLAG })
        }
    }
}
