//! Closed forms for β and ∂ω/∂β, plus the two matrices they invert.
//!
//! Indices follow the optimality system: ω_1 > … > ω_P, interior extrema
//! κ_1 < … < κ_{P−1}, and κ_P := 2 where a P-th extremum is needed.

use crate::error::SrjError;
use crate::scalar::Real;

fn kappa_max<R: Real>() -> R {
    R::from_f64(2.0)
}

fn check_distinct<R: Real>(omegas: &[R]) -> Result<(), SrjError> {
    for i in 0..omegas.len() {
        for l in i + 1..omegas.len() {
            if omegas[i] == omegas[l] {
                return Err(SrjError::DuplicateWeight(i + 1, l + 1));
            }
        }
    }
    Ok(())
}

fn one_minus<R: Real>(k: &R, w: &R) -> R {
    R::one() - k.clone() * w.clone()
}

/// β_i = Π_{k=1}^{P−1} (1 − κ_k ω_i) · Π_{l≠i} ω_l / (ω_l − ω_i).
pub fn beta_from<R: Real>(omegas: &[R], kappas: &[R]) -> Result<Vec<R>, SrjError> {
    let p = omegas.len();
    if kappas.len() + 1 != p {
        return Err(SrjError::OutOfRange(format!(
            "{} kappas for P = {p}",
            kappas.len()
        )));
    }
    check_distinct(omegas)?;
    Ok((0..p)
        .map(|i| {
            let mut v = R::one();
            for k in kappas {
                v = v * one_minus(k, &omegas[i]);
            }
            for (l, wl) in omegas.iter().enumerate() {
                if l != i {
                    v = v * wl.clone() / (wl.clone() - omegas[i].clone());
                }
            }
            v
        })
        .collect())
}

/// κ_1..κ_{P−1} followed by κ_P = 2.
pub fn extended_kappas<R: Real>(kappas: &[R]) -> Vec<R> {
    let mut k = kappas.to_vec();
    k.push(kappa_max());
    k
}

/// A_ij = κ_i β_j / (1 − κ_i ω_j), i, j = 1..P, rows over κ_1..κ_P.
pub fn a_matrix<R: Real>(omegas: &[R], kappas_full: &[R], betas: &[R]) -> Vec<Vec<R>> {
    kappas_full
        .iter()
        .map(|k| {
            omegas
                .iter()
                .zip(betas)
                .map(|(w, b)| k.clone() * b.clone() / one_minus(k, w))
                .collect()
        })
        .collect()
}

/// Explicit inverse of [`a_matrix`]:
/// Ã_ij = Π_k (1 − κ_k ω_i) / (β_i κ_j) · Π_{k≠j} 1/(κ_k − κ_j)
///        · Π_{l≠i} (1 − κ_j ω_l)/(ω_l − ω_i).
pub fn a_inverse<R: Real>(omegas: &[R], kappas_full: &[R], betas: &[R]) -> Vec<Vec<R>> {
    let p = omegas.len();
    // Row factor Π_k (1 − κ_k ω_i) / β_i and column factor Π_{k≠j} 1/(κ_k − κ_j) / κ_j.
    let row: Vec<R> = (0..p)
        .map(|i| {
            let mut v = R::one();
            for k in kappas_full {
                v = v * one_minus(k, &omegas[i]);
            }
            v / betas[i].clone()
        })
        .collect();
    let col: Vec<R> = (0..p)
        .map(|j| {
            let mut v = R::one() / kappas_full[j].clone();
            for (k, kk) in kappas_full.iter().enumerate() {
                if k != j {
                    v = v / (kk.clone() - kappas_full[j].clone());
                }
            }
            v
        })
        .collect();
    (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let mut v = row[i].clone() * col[j].clone();
                    for (l, wl) in omegas.iter().enumerate() {
                        if l != i {
                            v = v * one_minus(&kappas_full[j], wl)
                                / (wl.clone() - omegas[i].clone());
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// B_ij = (1 − ω_j/ω_P) / (1 − κ_i ω_j), i, j = 1..P−1.
pub fn b_matrix<R: Real>(omegas: &[R], kappas: &[R]) -> Vec<Vec<R>> {
    let p = omegas.len();
    let wp = omegas[p - 1].clone();
    kappas
        .iter()
        .map(|k| {
            omegas[..p - 1]
                .iter()
                .map(|w| (R::one() - w.clone() / wp.clone()) / one_minus(k, w))
                .collect()
        })
        .collect()
}

/// Explicit inverse of [`b_matrix`]:
/// B̃_ij = ω_P (1 − κ_j ω_i)/(1 − κ_j ω_P) · Π_{k≠j}^{P−1} (1 − κ_k ω_i)/(κ_k − κ_j)
///        · Π_{l≠i}^{P} (1 − κ_j ω_l)/(ω_l − ω_i).
pub fn b_inverse<R: Real>(omegas: &[R], kappas: &[R]) -> Vec<Vec<R>> {
    let p = omegas.len();
    let wp = omegas[p - 1].clone();
    (0..p - 1)
        .map(|i| {
            (0..p - 1)
                .map(|j| {
                    let kj = &kappas[j];
                    let mut v =
                        wp.clone() * one_minus(kj, &omegas[i]) / one_minus(kj, &wp);
                    for (k, kk) in kappas.iter().enumerate() {
                        if k != j {
                            v = v * one_minus(kk, &omegas[i]) / (kk.clone() - kj.clone());
                        }
                    }
                    for (l, wl) in omegas.iter().enumerate() {
                        if l != i {
                            v = v * one_minus(kj, wl) / (wl.clone() - omegas[i].clone());
                        }
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// ∂ω_i/∂β_q for i = 1..P, q = 1..P−1 (row i, column q).
///
/// Column q is Ã·f with f_j = ln|(1 − κ_j ω_q)/(1 − κ_j ω_P)|, j = 1..P.
pub fn domega_dbeta<R: Real>(
    omegas: &[R],
    kappas: &[R],
    betas: &[R],
) -> Result<Vec<Vec<R>>, SrjError> {
    let p = omegas.len();
    if kappas.len() + 1 != p || betas.len() != p {
        return Err(SrjError::OutOfRange(format!(
            "shape mismatch: P = {p}, {} kappas, {} betas",
            kappas.len(),
            betas.len()
        )));
    }
    check_distinct(omegas)?;
    let kf = extended_kappas(kappas);
    for k in &kf {
        for (i, w) in omegas.iter().enumerate() {
            if one_minus(k, w) == R::zero() {
                return Err(SrjError::Pole {
                    kappa: k.to_f64(),
                    index: i + 1,
                });
            }
        }
    }
    let inv = a_inverse(omegas, &kf, betas);
    // log_terms[j][l] = ln|1 − κ_j ω_l|
    let log_terms: Vec<Vec<R>> = kf
        .iter()
        .map(|k| omegas.iter().map(|w| one_minus(k, w).abs().ln()).collect())
        .collect();
    let mut out = vec![vec![R::zero(); p - 1]; p];
    for q in 0..p - 1 {
        let f: Vec<R> = (0..p)
            .map(|j| log_terms[j][q].clone() - log_terms[j][p - 1].clone())
            .collect();
        for i in 0..p {
            let mut acc = R::zero();
            for j in 0..p {
                acc = acc + inv[i][j].clone() * f[j].clone();
            }
            out[i][q] = acc;
        }
    }
    Ok(out)
}
