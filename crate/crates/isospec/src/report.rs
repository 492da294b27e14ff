//! Artifact formats: JSON views, spectrum CSV, and deterministic hashes.
//!
//! Every artifact carries the hash of the configuration that produced it
//! plus the seed; nothing here records wall-clock time, so identical runs
//! serialise to identical bytes. Complex matrices are stored row major as
//! `[re, im]` pairs.

use crate::jmap::{IsospectralFamily, JMap, NonequivCertificate, Verdict};
use crate::liealg::{build_algebra, AlgebraSpec, Family};
use crate::linalg::{CMat, C};
use crate::metric::LeftInvariantMetric;
use crate::potentials::{Potential, SuiteReport};
use crate::spectra::SpectrumMultiset;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::str::FromStr;

pub type MatJson = Vec<Vec<[f64; 2]>>;

pub fn mat_to_json(m: &CMat) -> MatJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn mat_from_json(v: &MatJson) -> Result<CMat> {
    let nrows = v.len();
    let ncols = v.first().map_or(0, |row| row.len());
    if v.iter().any(|row| row.len() != ncols) {
        return Err(Error::Invalid("ragged matrix rows".into()));
    }
    let mut m = CMat::zeros(nrows, ncols);
    for (i, row) in v.iter().enumerate() {
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = C::new(re, im);
        }
    }
    Ok(m)
}

/// SHA-256 of the canonical JSON encoding (object keys sorted).
pub fn config_hash<T: Serialize>(cfg: &T) -> Result<String> {
    let value = serde_json::to_value(cfg)?;
    let canonical = serde_json::to_string(&value)?;
    Ok(hex_digest(canonical.as_bytes()))
}

/// SHA-256 over the exact bit patterns of the matrix entries, row major.
pub fn matrix_checksum(ms: &[&CMat]) -> String {
    let mut hasher = Sha256::new();
    for m in ms {
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                hasher.update(m[(i, j)].re.to_le_bytes());
                hasher.update(m[(i, j)].im.to_le_bytes());
            }
        }
    }
    format!("{:x}", hasher.finalize())
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

pub fn to_pretty_json<T: Serialize>(t: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(t)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub family: String,
    pub n: usize,
    pub dim: usize,
    pub matrix_side: usize,
    pub basis_checksum: String,
}

pub fn algebra_to_json(alg: &AlgebraSpec) -> AlgebraJson {
    let refs: Vec<&CMat> = alg.basis.iter().collect();
    AlgebraJson {
        family: alg.family.label().into(),
        n: alg.n,
        dim: alg.dim,
        matrix_side: alg.matrix_side,
        basis_checksum: matrix_checksum(&refs),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JmapJson {
    pub family: String,
    pub n: usize,
    pub j1: MatJson,
    pub j2: MatJson,
    pub seed: Option<u64>,
}

pub fn jmap_to_json(j: &JMap) -> JmapJson {
    JmapJson {
        family: j.algebra.family.label().into(),
        n: j.algebra.n,
        j1: mat_to_json(&j.j1),
        j2: mat_to_json(&j.j2),
        seed: j.seed,
    }
}

pub fn jmap_from_json(v: &JmapJson) -> Result<JMap> {
    let family = Family::from_str(&v.family)?;
    let alg = build_algebra(family, v.n)?;
    JMap::new(alg, mat_from_json(&v.j1)?, mat_from_json(&v.j2)?, v.seed)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: String,
    pub n: usize,
    pub seed: Option<u64>,
    pub num_params: usize,
    pub num_steps: usize,
    pub step_size: f64,
    pub rank_tol: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub config: FamilyConfig,
    pub config_hash: String,
    pub truncated: bool,
    pub steps: Vec<Vec<usize>>,
    pub residuals: Vec<f64>,
    pub points: Vec<JmapJson>,
}

pub fn family_to_json(fam: &IsospectralFamily, rank_tol: f64) -> Result<FamilyJson> {
    let config = FamilyConfig {
        family: fam.base.algebra.family.label().into(),
        n: fam.base.algebra.n,
        seed: fam.base.seed,
        num_params: fam.num_params,
        num_steps: fam.num_steps,
        step_size: fam.step_size,
        rank_tol,
    };
    Ok(FamilyJson {
        config_hash: config_hash(&config)?,
        config,
        truncated: fam.truncated,
        steps: fam.steps.clone(),
        residuals: fam.residuals.clone(),
        points: fam.points.iter().map(jmap_to_json).collect(),
    })
}

pub fn family_from_json(v: &FamilyJson) -> Result<IsospectralFamily> {
    if v.points.is_empty() {
        return Err(Error::Invalid("family archive has no points".into()));
    }
    let points: Vec<JMap> = v
        .points
        .iter()
        .map(jmap_from_json)
        .collect::<Result<_>>()?;
    Ok(IsospectralFamily {
        base: points[0].clone(),
        points,
        steps: v.steps.clone(),
        residuals: v.residuals.clone(),
        num_params: v.config.num_params,
        num_steps: v.config.num_steps,
        step_size: v.config.step_size,
        truncated: v.truncated,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub config_hash: String,
    pub a_label: String,
    pub b_label: String,
    pub margin: f64,
    pub verdict: Verdict,
    pub max_word_len: usize,
    pub word_count: usize,
    pub grid_size: usize,
    pub best_angle: f64,
    pub best_reflected: bool,
    pub tol: f64,
}

pub fn certificate_to_json(
    cert: &NonequivCertificate,
    a_label: &str,
    b_label: &str,
) -> Result<CertificateJson> {
    #[derive(Serialize)]
    struct Cfg<'a> {
        a_label: &'a str,
        b_label: &'a str,
        max_word_len: usize,
        grid_size: usize,
        tol: f64,
    }
    let hash = config_hash(&Cfg {
        a_label,
        b_label,
        max_word_len: cert.max_word_len,
        grid_size: cert.grid_size,
        tol: cert.tol,
    })?;
    Ok(CertificateJson {
        config_hash: hash,
        a_label: a_label.into(),
        b_label: b_label.into(),
        margin: cert.margin,
        verdict: cert.verdict,
        max_word_len: cert.max_word_len,
        word_count: cert.word_set.len(),
        grid_size: cert.grid_size,
        best_angle: cert.best_angle,
        best_reflected: cert.best_reflected,
        tol: cert.tol,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricJson {
    pub config_hash: String,
    pub family: String,
    pub inner_n: usize,
    pub ambient_n: usize,
    pub jmap: JmapJson,
    /// Row-major lower triangle of the gram matrix, diagonal included.
    pub gram_lower: Vec<f64>,
    pub frame_checksum: String,
    pub det_residual: f64,
}

pub fn metric_to_json(j: &JMap, metric: &LeftInvariantMetric) -> Result<MetricJson> {
    let jm = jmap_to_json(j);
    let hash = config_hash(&jm)?;
    let dim = metric.gram.nrows();
    let mut gram_lower = Vec::with_capacity(dim * (dim + 1) / 2);
    for i in 0..dim {
        for jx in 0..=i {
            gram_lower.push(metric.gram[(i, jx)]);
        }
    }
    let frame_c = metric.frame.map(|v| C::new(v, 0.0));
    Ok(MetricJson {
        config_hash: hash,
        family: metric.ambient.family.label().into(),
        inner_n: j.algebra.n,
        ambient_n: metric.ambient.n,
        jmap: jm,
        gram_lower,
        frame_checksum: matrix_checksum(&[&frame_c]),
        det_residual: metric.det_residual(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumProvenance {
    pub config_hash: String,
    pub seed: Option<u64>,
    pub family: String,
    pub inner_n: usize,
    pub ambient_n: usize,
}

/// Render spectra as CSV with `#`-prefixed provenance headers.
pub fn spectra_to_csv(prov: &SpectrumProvenance, specs: &[&SpectrumMultiset]) -> String {
    let mut out = String::new();
    out.push_str("# kind=spectrum\n");
    out.push_str(&format!("# config_hash={}\n", prov.config_hash));
    match prov.seed {
        Some(s) => out.push_str(&format!("# seed={s}\n")),
        None => out.push_str("# seed=none\n"),
    }
    out.push_str(&format!("# family={}\n", prov.family));
    out.push_str(&format!("# inner_n={}\n", prov.inner_n));
    out.push_str(&format!("# ambient_n={}\n", prov.ambient_n));
    out.push_str("rep_label,eigenvalue,multiplicity\n");
    for spec in specs {
        for &(v, m) in &spec.entries {
            out.push_str(&format!("{},{},{}\n", spec.rep_label, v, m));
        }
    }
    out
}

pub fn spectra_from_csv(text: &str) -> Result<(SpectrumProvenance, Vec<SpectrumMultiset>)> {
    let mut headers = std::collections::BTreeMap::new();
    let mut rows: Vec<(String, f64, usize)> = Vec::new();
    let mut saw_header_row = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some((k, v)) = rest.split_once('=') {
                headers.insert(k.to_string(), v.to_string());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !saw_header_row {
            if line != "rep_label,eigenvalue,multiplicity" {
                return Err(Error::Invalid(format!("unexpected CSV header: {line}")));
            }
            saw_header_row = true;
            continue;
        }
        let mut parts = line.split(',');
        let (label, ev, mult) = (parts.next(), parts.next(), parts.next());
        match (label, ev, mult, parts.next()) {
            (Some(l), Some(e), Some(m), None) => {
                let ev: f64 = e
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad eigenvalue: {e}")))?;
                let mult: usize = m
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad multiplicity: {m}")))?;
                rows.push((l.to_string(), ev, mult));
            }
            _ => return Err(Error::Invalid(format!("malformed CSV row: {line}"))),
        }
    }

    let need = |k: &str| -> Result<String> {
        headers
            .get(k)
            .cloned()
            .ok_or_else(|| Error::Provenance(format!("spectrum CSV lacks header {k}")))
    };
    let seed_raw = need("seed")?;
    let prov = SpectrumProvenance {
        config_hash: need("config_hash")?,
        seed: if seed_raw == "none" {
            None
        } else {
            Some(
                seed_raw
                    .parse()
                    .map_err(|_| Error::Invalid(format!("bad seed: {seed_raw}")))?,
            )
        },
        family: need("family")?,
        inner_n: need("inner_n")?
            .parse()
            .map_err(|_| Error::Invalid("bad inner_n".into()))?,
        ambient_n: need("ambient_n")?
            .parse()
            .map_err(|_| Error::Invalid("bad ambient_n".into()))?,
    };

    let mut specs: Vec<SpectrumMultiset> = Vec::new();
    for (label, ev, mult) in rows {
        if specs.last().map(|s| s.rep_label.as_str()) != Some(label.as_str()) {
            specs.push(SpectrumMultiset {
                rep_label: label,
                entries: Vec::new(),
                merge_tol: 0.0,
                op_norm: 0.0,
            });
        }
        let spec = specs.last_mut().expect("pushed above");
        spec.entries.push((ev, mult));
        spec.op_norm = spec.op_norm.max(ev.abs());
    }
    Ok((prov, specs))
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteJson {
    pub config_hash: String,
    pub potential: Potential,
    pub report: SuiteReport,
    pub max_violation: f64,
}

pub fn suite_to_json(p: &Potential, report: &SuiteReport) -> Result<SuiteJson> {
    #[derive(Serialize)]
    struct Cfg {
        n: usize,
        r: usize,
        c1: f64,
        c2: f64,
        samples: usize,
        seed: u64,
    }
    let hash = config_hash(&Cfg {
        n: p.layout.n,
        r: p.layout.r,
        c1: p.c1,
        c2: p.c2,
        samples: report.samples,
        seed: report.seed,
    })?;
    Ok(SuiteJson {
        config_hash: hash,
        potential: p.clone(),
        report: report.clone(),
        max_violation: report.max_violation(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jmap::sample_jmap;
    use crate::liealg::build_algebra;

    #[test]
    fn matrix_round_trips_through_json() {
        let alg = build_algebra(Family::Unitary, 3).unwrap();
        let j = sample_jmap(&alg, 9);
        let json = mat_to_json(&j.j1);
        let back = mat_from_json(&json).unwrap();
        assert_eq!(back, j.j1);
    }

    #[test]
    fn jmap_round_trips_through_json() {
        let alg = build_algebra(Family::Symplectic, 2).unwrap();
        let j = sample_jmap(&alg, 4);
        let v = jmap_to_json(&j);
        let back = jmap_from_json(&v).unwrap();
        assert_eq!(back.j1, j.j1);
        assert_eq!(back.j2, j.j2);
        assert_eq!(back.seed, Some(4));
    }

    #[test]
    fn config_hash_is_stable_and_key_order_free() {
        let a = serde_json::json!({"x": 1, "y": [1.5, 2.5]});
        let b = serde_json::json!({"y": [1.5, 2.5], "x": 1});
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        let c = serde_json::json!({"x": 2, "y": [1.5, 2.5]});
        assert_ne!(config_hash(&a).unwrap(), config_hash(&c).unwrap());
    }

    #[test]
    fn spectra_csv_round_trips() {
        let prov = SpectrumProvenance {
            config_hash: "abc".into(),
            seed: Some(7),
            family: "so".into(),
            inner_n: 5,
            ambient_n: 9,
        };
        let s1 = SpectrumMultiset {
            rep_label: "defining".into(),
            entries: vec![(0.5, 2), (1.25, 7)],
            merge_tol: 1e-9,
            op_norm: 1.25,
        };
        let s2 = SpectrumMultiset {
            rep_label: "square".into(),
            entries: vec![(0.0, 1)],
            merge_tol: 1e-9,
            op_norm: 0.0,
        };
        let csv = spectra_to_csv(&prov, &[&s1, &s2]);
        let (prov2, specs) = spectra_from_csv(&csv).unwrap();
        assert_eq!(prov, prov2);
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].entries, s1.entries);
        assert_eq!(specs[1].rep_label, "square");
        // byte determinism
        assert_eq!(csv, spectra_to_csv(&prov, &[&s1, &s2]));
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(spectra_from_csv("rep_label,eigenvalue\nx,1\n").is_err());
        let no_prov = "rep_label,eigenvalue,multiplicity\ndefining,1.0,2\n";
        assert!(matches!(
            spectra_from_csv(no_prov),
            Err(Error::Provenance(_))
        ));
    }

    #[test]
    fn family_archive_round_trips() {
        let alg = build_algebra(Family::Symplectic, 2).unwrap();
        let base = sample_jmap(&alg, 5);
        let fam = crate::jmap::generate_family(&base, 1, 2, 0.05, 1e-6).unwrap();
        let v = family_to_json(&fam, 1e-6).unwrap();
        let back = family_from_json(&v).unwrap();
        assert_eq!(back.points.len(), fam.points.len());
        assert_eq!(back.points[2].j1, fam.points[2].j1);
        assert_eq!(back.steps, fam.steps);
    }
}
