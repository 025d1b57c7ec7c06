use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iteration cap of the simultaneous root iteration.
pub const MAX_ITERATIONS: usize = 200;
/// A root estimate is converged once its correction is below this (relative to `max(1, |z|)`).
pub const STEP_TOL: f64 = 1e-13;
/// Root estimates closer than `CLUSTER_TOL * max(1, |r|)` are one root of higher multiplicity.
pub const CLUSTER_TOL: f64 = 1e-6;

/// A characteristic root and its algebraic multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl Pole {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }

    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }
}

/// Distinct roots of a real monic polynomial, sorted by descending modulus.
///
/// Non-real roots always come with their conjugate (same multiplicity); the
/// member with positive imaginary part is listed first.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    poles: Vec<Pole>,
}

impl PoleSet {
    pub fn new(mut poles: Vec<Pole>) -> Self {
        poles.sort_by(|a, b| {
            b.modulus()
                .total_cmp(&a.modulus())
                .then(b.value.im.total_cmp(&a.value.im))
                .then(b.value.re.total_cmp(&a.value.re))
        });
        Self { poles }
    }

    pub fn poles(&self) -> &[Pole] {
        &self.poles
    }

    pub fn degree(&self) -> usize {
        self.poles.iter().map(|p| p.multiplicity).sum()
    }

    /// `max_k |r̂_k|`, zero for an empty set.
    pub fn dominant_modulus(&self) -> f64 {
        self.poles.first().map_or(0.0, Pole::modulus)
    }

    /// Coefficients (highest power first) of `Π (z − r̂_k)^{d_k}`.
    pub fn expand(&self) -> Vec<f64> {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for pole in &self.poles {
            for _ in 0..pole.multiplicity {
                let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
                for (k, c) in coeffs.iter().enumerate() {
                    next[k] += c;
                    next[k + 1] -= c * pole.value;
                }
                coeffs = next;
            }
        }
        coeffs.into_iter().map(|c| c.re).collect()
    }
}

fn horner(poly: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in poly {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Running rounding-error bound for Horner evaluation at a point of modulus `r`.
fn rounding_bound(abs_poly: &[f64], r: f64) -> f64 {
    let mut acc = 0.0;
    for &c in abs_poly {
        acc = acc * r + c;
    }
    8.0 * f64::EPSILON * acc * (abs_poly.len() as f64)
}

fn derivative(poly: &[Complex64]) -> Vec<Complex64> {
    let n = poly.len() - 1;
    poly[..n]
        .iter()
        .enumerate()
        .map(|(k, &c)| c * (n - k) as f64)
        .collect()
}

/// All roots of a monic polynomial (highest power first, nonzero constant
/// term) by Aberth–Ehrlich simultaneous iteration.
///
/// Each estimate stops moving once its correction drops below [`STEP_TOL`]
/// or its residual reaches the rounding floor of the evaluation; the latter is
/// what terminates estimates of multiple roots, whose convergence is only linear.
pub fn aberth_ehrlich(poly: &[f64]) -> Result<Vec<Complex64>> {
    let n = poly.len() - 1;
    let coeffs: Vec<Complex64> = poly.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let abs_coeffs: Vec<f64> = poly.iter().map(|c| c.abs()).collect();
    let dcoeffs = derivative(&coeffs);

    // Fujiwara-type radius, slightly rotated starting angles to break symmetry.
    let radius = (1..=n)
        .map(|k| poly[k].abs().powf(1.0 / k as f64))
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + 0.4))
        .collect();
    let mut done = vec![false; n];

    for _ in 0..MAX_ITERATIONS {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let zk = z[k];
            let p = horner(&coeffs, zk).0;
            if p.norm() <= rounding_bound(&abs_coeffs, zk.norm()) {
                done[k] = true;
                continue;
            }
            let dp = horner(&dcoeffs, zk).0;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (zk - z[j]).inv())
                .sum();
            let mut denom = dp - p * repulsion;
            if denom.norm() == 0.0 {
                denom = Complex64::new(f64::EPSILON, f64::EPSILON);
            }
            let step = p / denom;
            z[k] = zk - step;
            if step.norm() < STEP_TOL * zk.norm().max(1.0) {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(Error::RootsNotConverged {
        iterations: MAX_ITERATIONS,
        residuals: z.iter().map(|&zk| horner(&coeffs, zk).0.norm()).collect(),
    })
}

fn tolerance(z: Complex64) -> f64 {
    CLUSTER_TOL * z.norm().max(1.0)
}

/// Makes non-real estimates come in exact conjugate pairs and snaps the rest to the real axis.
fn enforce_conjugate_pairs(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    roots.sort_by(|a, b| b.im.total_cmp(&a.im));
    let mut used = vec![false; roots.len()];
    let mut out = Vec::with_capacity(roots.len());
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        if r.im <= tolerance(r) {
            out.push(Complex64::new(r.re, 0.0));
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (roots[a] - r.conj())
                    .norm()
                    .total_cmp(&(roots[b] - r.conj()).norm())
            });
        match partner {
            Some(j) => {
                used[j] = true;
                let avg = (r + roots[j].conj()) * 0.5;
                out.push(avg);
                out.push(avg.conj());
            }
            None => out.push(Complex64::new(r.re, 0.0)),
        }
    }
    out
}

fn cluster(roots: &[Complex64]) -> Vec<Pole> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let tol = CLUSTER_TOL * roots[i].norm().max(roots[j].norm()).max(1.0);
            if (roots[i] - roots[j]).norm() < tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(r, _)| *r == root) {
            Some((_, members)) => members.push(roots[i]),
            None => groups.push((root, vec![roots[i]])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            Pole {
                value: mean,
                multiplicity: members.len(),
            }
        })
        .collect()
}

/// Newton on the `(d−1)`-th derivative, where a root of multiplicity `d` is simple.
fn polish(coeffs: &[Complex64], pole: Pole) -> Complex64 {
    let mut target = coeffs.to_vec();
    for _ in 1..pole.multiplicity {
        target = derivative(&target);
    }
    let slope = derivative(&target);
    let mut z = pole.value;
    let mut residual = horner(&target, z).0.norm();
    for _ in 0..8 {
        let dp = horner(&slope, z).0;
        if dp.norm() == 0.0 || residual == 0.0 {
            break;
        }
        let candidate = z - horner(&target, z).0 / dp;
        let r = horner(&target, candidate).0.norm();
        if r >= residual {
            break;
        }
        z = candidate;
        residual = r;
    }
    if pole.value.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Distinct roots and multiplicities of a real monic polynomial given highest power first.
pub fn find_roots(poly: &[f64]) -> Result<PoleSet> {
    if poly.len() < 2 {
        return Err(Error::InvalidSpec("polynomial degree must be at least 1".into()));
    }
    if poly.iter().any(|c| !c.is_finite()) || poly[0] == 0.0 {
        return Err(Error::InvalidSpec("polynomial must be finite with a nonzero leading coefficient".into()));
    }
    let monic: Vec<f64> = poly.iter().map(|c| c / poly[0]).collect();

    // Exact zero roots are factored out before iterating.
    let zeros = monic.iter().rev().take_while(|&&c| c == 0.0).count();
    let reduced = &monic[..monic.len() - zeros];

    let mut poles = Vec::new();
    if zeros > 0 {
        poles.push(Pole {
            value: Complex64::new(0.0, 0.0),
            multiplicity: zeros,
        });
    }
    if reduced.len() > 1 {
        let estimates = enforce_conjugate_pairs(aberth_ehrlich(reduced)?);
        let full: Vec<Complex64> = reduced.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let clustered = cluster(&estimates);
        // Polish the upper member of each pair and mirror it onto its partner.
        let mut polished: Vec<Pole> = Vec::with_capacity(clustered.len());
        for pole in &clustered {
            if pole.value.im < 0.0 {
                continue;
            }
            let value = polish(&full, *pole);
            polished.push(Pole { value, multiplicity: pole.multiplicity });
            if pole.value.im > 0.0 {
                polished.push(Pole { value: value.conj(), multiplicity: pole.multiplicity });
            }
        }
        poles.extend(polished);
    }
    Ok(PoleSet::new(poles))
}
