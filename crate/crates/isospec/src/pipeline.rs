//! One-shot reproduction run: sample, continue, certify, compare spectra.
//!
//! The pipeline strings the library together on a single seed and returns
//! all artifacts as strings, so callers can diff two runs byte for byte.

use crate::jmap::{
    deformation_dims, generate_family, genericity_check, is_isospectral, nonequiv_certificate,
    sample_jmap, DeformationDims, Verdict,
};
use crate::liealg::{build_algebra, embedding, Family};
use crate::metric::build_metric;
use crate::report::{
    certificate_to_json, config_hash, family_to_json, spectra_to_csv, to_pretty_json,
    CertificateJson, SpectrumProvenance,
};
use crate::spectra::{
    compare_spectra, defining_rep, laplace_block_spectrum, tensor_square_rep, SpectrumMultiset,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub num_params: usize,
    pub num_steps: usize,
    pub step_size: f64,
    pub rank_tol: f64,
    pub cert_pairs: usize,
    pub cert_word_len: usize,
    pub cert_grid: usize,
    pub cert_tol: f64,
    pub tensor_square: bool,
    pub compare_rel_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            family: Family::Orthogonal,
            n: 5,
            seed: 1,
            num_params: 2,
            num_steps: 1,
            step_size: 0.05,
            rank_tol: crate::jmap::DEFORM_RANK_TOL,
            cert_pairs: 3,
            cert_word_len: 6,
            cert_grid: 360,
            cert_tol: 1e-6,
            tensor_square: false,
            compare_rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectraComparison {
    pub point: usize,
    pub rep_label: String,
    pub discrepancy: f64,
    pub tol: f64,
    pub within_tol: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub config: PipelineConfig,
    pub config_hash: String,
    pub dims: DeformationDims,
    pub base_generic: bool,
    pub truncated: bool,
    pub num_points: usize,
    pub max_family_residual: f64,
    pub min_pairwise_distance: f64,
    pub base_isospectral_residual: f64,
    pub spectra: Vec<SpectraComparison>,
    pub certificates: Vec<CertificateJson>,
    pub all_pairs_nonequivalent: bool,
    pub all_spectra_match: bool,
}

/// Artifact strings, ready to be written to disk. Identical configurations
/// produce identical bytes.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub family_json: String,
    pub spectra_csv: String,
    pub certificates_json: String,
    pub summary_json: String,
}

pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineArtifacts> {
    let alg = build_algebra(cfg.family, cfg.n)?;
    let base = sample_jmap(&alg, cfg.seed);
    let dims = deformation_dims(&base, cfg.rank_tol)?;
    let base_generic = genericity_check(&base);

    let fam = generate_family(
        &base,
        cfg.num_params,
        cfg.num_steps,
        cfg.step_size,
        cfg.rank_tol,
    )?;
    let family_json = to_pretty_json(&family_to_json(&fam, cfg.rank_tol)?)?;

    let emb = embedding(cfg.family, cfg.n)?;
    let mut reps = vec![defining_rep(&emb.ambient)];
    if cfg.tensor_square {
        reps.push(tensor_square_rep(&emb.ambient)?);
    }

    let mut specs: Vec<SpectrumMultiset> = Vec::new();
    for (i, point) in fam.points.iter().enumerate() {
        let (_, metric) = build_metric(point, &emb)?;
        for rep in &reps {
            let mut spec = laplace_block_spectrum(&metric, rep)?;
            spec.rep_label = format!("{}[{i}]", rep.label);
            specs.push(spec);
        }
    }

    let n_reps = reps.len();
    let mut comparisons = Vec::new();
    let mut all_spectra_match = true;
    for i in 1..fam.points.len() {
        for r in 0..n_reps {
            let a = &specs[r];
            let b = &specs[i * n_reps + r];
            let tol = cfg.compare_rel_tol * a.op_norm;
            let discrepancy = compare_spectra(a, b, tol)?;
            let within_tol = discrepancy <= tol;
            all_spectra_match &= within_tol;
            comparisons.push(SpectraComparison {
                point: i,
                rep_label: reps[r].label.clone(),
                discrepancy,
                tol,
                within_tol,
            });
        }
    }

    let cfg_hash = config_hash(cfg)?;
    let prov = SpectrumProvenance {
        config_hash: cfg_hash.clone(),
        seed: Some(cfg.seed),
        family: cfg.family.label().into(),
        inner_n: cfg.n,
        ambient_n: emb.ambient.n,
    };
    let spec_refs: Vec<&SpectrumMultiset> = specs.iter().collect();
    let spectra_csv = spectra_to_csv(&prov, &spec_refs);

    let mut certificates = Vec::new();
    let mut all_nonequiv = true;
    let pair_count = cfg.cert_pairs.min(fam.points.len().saturating_sub(1));
    for k in 1..=pair_count {
        let cert = nonequiv_certificate(
            &fam.points[0],
            &fam.points[k],
            cfg.cert_word_len,
            cfg.cert_grid,
            cfg.cert_tol,
        )?;
        all_nonequiv &= cert.verdict == Verdict::Nonequivalent;
        certificates.push(certificate_to_json(&cert, "p0", &format!("p{k}"))?);
    }
    let certificates_json = to_pretty_json(&certificates)?;

    let far = fam.points.last().ok_or_else(|| {
        Error::Numerical("family collapsed to no points".into())
    })?;
    let base_check = is_isospectral(&fam.points[0], far, crate::jmap::ISOSPEC_TOL)?;

    let summary = PipelineSummary {
        config: cfg.clone(),
        config_hash: cfg_hash,
        dims,
        base_generic,
        truncated: fam.truncated,
        num_points: fam.points.len(),
        max_family_residual: fam.residuals.iter().copied().fold(0.0, f64::max),
        min_pairwise_distance: fam.min_pairwise_distance(),
        base_isospectral_residual: base_check.residual,
        spectra: comparisons,
        certificates,
        all_pairs_nonequivalent: all_nonequiv,
        all_spectra_match,
    };
    let summary_json = to_pretty_json(&summary)?;

    Ok(PipelineArtifacts {
        family_json,
        spectra_csv,
        certificates_json,
        summary_json,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_smoke_on_a_small_symplectic_run() {
        let cfg = PipelineConfig {
            family: Family::Symplectic,
            n: 2,
            seed: 3,
            num_steps: 1,
            cert_pairs: 1,
            cert_word_len: 4,
            cert_grid: 120,
            ..PipelineConfig::default()
        };
        let arts = run_pipeline(&cfg).unwrap();
        let summary: serde_json::Value = serde_json::from_str(&arts.summary_json).unwrap();
        assert_eq!(summary["num_points"], 4);
        assert_eq!(summary["truncated"], false);
        assert_eq!(summary["all_spectra_match"], true);
        assert_eq!(summary["all_pairs_nonequivalent"], true);
        assert!(arts.spectra_csv.contains("defining[3]"));
    }
}
