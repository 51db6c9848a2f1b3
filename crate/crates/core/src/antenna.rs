//! Two-element quantum dipole antenna: the symmetric four-port scattering
//! matrix, its block split with noise operators, Fock-state transformation,
//! the far-zone picture and the angular correlation patterns.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_f64, write_lines};

/// Tolerance for the unitarity relations of the scattering matrix.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Default Fock truncation per mode.
pub const DEFAULT_N_MAX: usize = 4;
/// Default number of θ samples on [0, π].
pub const DEFAULT_THETA_POINTS: usize = 721;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Residuals of the relations a unitary symmetric four-port must satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstraintReport {
    /// |r|² + |t1|² + |t2|² + |t3|² − 1.
    pub power: f64,
    /// Re(r t1* + t2 t3*).
    pub coupling_1: f64,
    /// Re(r t2* + t1 t3*).
    pub coupling_2: f64,
    /// Re(r t3* + t1 t2*).
    pub coupling_3: f64,
    /// max |S S† − I|.
    pub unitarity: f64,
}

impl ConstraintReport {
    /// Relations violated beyond `tol`, each named by its formula.
    pub fn violations(&self, tol: f64) -> Vec<String> {
        [
            ("|r|^2 + |t1|^2 + |t2|^2 + |t3|^2 = 1", self.power),
            ("Re(r t1* + t2 t3*) = 0", self.coupling_1),
            ("Re(r t2* + t1 t3*) = 0", self.coupling_2),
            ("Re(r t3* + t1 t2*) = 0", self.coupling_3),
            ("S S^dagger = I", self.unitarity),
        ]
        .iter()
        .filter(|(_, v)| !(v.abs() <= tol))
        .map(|(name, v)| format!("{name} (residual {:.3e})", v.abs()))
        .collect()
    }
}

/// Symmetric scattering matrix
/// [[r, t1, t2, t3], [t1, r, t3, t2], [t2, t3, r, t1], [t3, t2, t1, r]]
/// over the modes (x1, x2, y1, y2).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SMatrix4 {
    pub r: Complex64,
    pub t1: Complex64,
    pub t2: Complex64,
    pub t3: Complex64,
}

/// A = [[r, t1], [t1, r]] couples each sector to itself, B = [[t2, t3], [t3, t2]]
/// couples feed lines and emitters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockPair {
    pub a: [[Complex64; 2]; 2],
    pub b: [[Complex64; 2]; 2],
}

impl BlockPair {
    /// [[A, B], [B, A]].
    pub fn assemble(&self) -> [[Complex64; 4]; 4] {
        let mut m = [[ZERO; 4]; 4];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = self.a[i][j];
                m[i + 2][j + 2] = self.a[i][j];
                m[i][j + 2] = self.b[i][j];
                m[i + 2][j] = self.b[i][j];
            }
        }
        m
    }
}

/// Residuals of the four relations and of full unitarity, without judging them.
pub fn check_smatrix(r: Complex64, t1: Complex64, t2: Complex64, t3: Complex64) -> ConstraintReport {
    let s = SMatrix4 { r, t1, t2, t3 };
    let m = s.matrix();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let dot: Complex64 = (0..4).map(|k| m[i][k] * m[j][k].conj()).sum();
            let d = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - d).norm());
        }
    }
    ConstraintReport {
        power: r.norm_sqr() + t1.norm_sqr() + t2.norm_sqr() + t3.norm_sqr() - 1.0,
        coupling_1: (r * t1.conj() + t2 * t3.conj()).re,
        coupling_2: (r * t2.conj() + t1 * t3.conj()).re,
        coupling_3: (r * t3.conj() + t1 * t2.conj()).re,
        unitarity: worst,
    }
}

/// Validated scattering matrix; the error names every violated relation.
pub fn make_smatrix(r: Complex64, t1: Complex64, t2: Complex64, t3: Complex64) -> Result<SMatrix4> {
    if ![r, t1, t2, t3].iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        return Err(Error::Validation("scattering parameters must be finite".into()));
    }
    let bad = check_smatrix(r, t1, t2, t3).violations(UNITARITY_TOL);
    if bad.is_empty() {
        Ok(SMatrix4 { r, t1, t2, t3 })
    } else {
        Err(Error::Validation(format!(
            "scattering matrix is not unitary: violated {}",
            bad.join("; ")
        )))
    }
}

impl SMatrix4 {
    /// The matrix commutes with the two mode swaps, so its eigenvalues are
    /// r + s1 t1 + s2 t2 + s1 s2 t3 for s1, s2 = ±1. Any four unit phases
    /// e^{iα} taken in the order (s1, s2) = (+,+), (−,+), (+,−), (−,−) give a
    /// unitary matrix.
    pub fn from_eigenphases(alpha: [f64; 4]) -> Result<Self> {
        let mu: Vec<Complex64> = alpha.iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
        make_smatrix(
            (mu[0] + mu[1] + mu[2] + mu[3]) / 4.0,
            (mu[0] - mu[1] + mu[2] - mu[3]) / 4.0,
            (mu[0] + mu[1] - mu[2] - mu[3]) / 4.0,
            (mu[0] - mu[1] - mu[2] + mu[3]) / 4.0,
        )
    }

    /// Member of the family with t1 = r and t3 = −t2, |r| = |t2| = 1/2,
    /// which satisfies t1 t2 + r t3 = 0 and t1 t3 + r t2 = 0.
    pub fn separable(phase_r: f64, phase_t: f64) -> Result<Self> {
        let r = Complex64::from_polar(0.5, phase_r);
        let t = Complex64::from_polar(0.5, phase_t);
        make_smatrix(r, r, t, -t)
    }

    /// Matched, uncoupled feeds: r = t1 = 0, t2 = 1/√2, t3 = −i/√2.
    pub fn matched() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        SMatrix4 {
            r: ZERO,
            t1: ZERO,
            t2: Complex64::new(h, 0.0),
            t3: Complex64::new(0.0, -h),
        }
    }

    pub fn matrix(&self) -> [[Complex64; 4]; 4] {
        self.blocks().assemble()
    }

    pub fn blocks(&self) -> BlockPair {
        BlockPair {
            a: [[self.r, self.t1], [self.t1, self.r]],
            b: [[self.t2, self.t3], [self.t3, self.t2]],
        }
    }

    pub fn report(&self) -> ConstraintReport {
        check_smatrix(self.r, self.t1, self.t2, self.t3)
    }
}

/// [f_i, f_j†] = (A A†)_ij for the noise operators f = A y_in.
pub fn noise_commutators(s: &SMatrix4) -> [[f64; 2]; 2] {
    let a = s.blocks().a;
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let v: Complex64 = (0..2).map(|k| a[i][k] * a[j][k].conj()).sum();
            out[i][j] = v.re;
        }
    }
    out
}

/// Normalized superposition of occupation-number states over `modes` modes,
/// each holding at most `n_max` photons.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: usize,
    n_max: usize,
    amps: BTreeMap<Vec<u8>, Complex64>,
}

impl FockState {
    pub fn vacuum(modes: usize, n_max: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(vec![0; modes], Complex64::new(1.0, 0.0));
        FockState { modes, n_max, amps }
    }

    pub fn basis(occupation: &[usize], n_max: usize) -> Result<Self> {
        Self::from_amplitudes(occupation.len(), n_max, [(occupation.to_vec(), Complex64::new(1.0, 0.0))])
    }

    /// Sums repeated occupations and normalizes; amplitudes below 1e−300 are
    /// dropped.
    pub fn from_amplitudes<I>(modes: usize, n_max: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Complex64)>,
    {
        let mut s = Self::unnormalized(modes, n_max, terms)?;
        let norm = s.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Validation("state has zero or non-finite norm".into()));
        }
        s.amps.values_mut().for_each(|v| *v /= norm);
        Ok(s)
    }

    fn unnormalized<I>(modes: usize, n_max: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, Complex64)>,
    {
        if n_max > u8::MAX as usize {
            return Err(Error::Validation(format!("truncation {n_max} exceeds 255")));
        }
        let mut amps: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, c) in terms {
            if occ.len() != modes {
                return Err(Error::Validation(format!(
                    "occupation {occ:?} does not have {modes} modes"
                )));
            }
            if let Some(&n) = occ.iter().find(|&&n| n > n_max) {
                return Err(Error::Capacity { needed: n, n_max });
            }
            *amps.entry(occ.iter().map(|&n| n as u8).collect()).or_insert(ZERO) += c;
        }
        amps.retain(|_, v| v.norm() > 1e-300);
        Ok(FockState { modes, n_max, amps })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitude(&self, occupation: &[usize]) -> Complex64 {
        let key: Vec<u8> = occupation.iter().map(|&n| n as u8).collect();
        self.amps.get(&key).copied().unwrap_or(ZERO)
    }

    /// Nonzero terms in lexicographic order of occupation.
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, Complex64)> + '_ {
        self.amps
            .iter()
            .map(|(k, v)| (k.iter().map(|&n| n as usize).collect(), *v))
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn overlap(&self, other: &FockState) -> Complex64 {
        self.amps
            .iter()
            .filter_map(|(k, v)| other.amps.get(k).map(|w| v.conj() * w))
            .sum()
    }

    /// The photon number if every term carries the same total.
    pub fn photon_number(&self) -> Option<usize> {
        let mut totals = self.amps.keys().map(|k| k.iter().map(|&n| n as usize).sum::<usize>());
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }

    /// State of the modes `keep` when every other mode is in its vacuum.
    /// Fails if any term excites a dropped mode.
    pub fn restrict(&self, keep: &[usize]) -> Result<FockState> {
        let mut terms = Vec::new();
        for (occ, c) in self.terms() {
            let excited = (0..self.modes).any(|m| !keep.contains(&m) && occ[m] > 0);
            if excited {
                return Err(Error::Validation(format!(
                    "term {occ:?} excites a mode outside {keep:?}"
                )));
            }
            terms.push((keep.iter().map(|&m| occ[m]).collect(), c));
        }
        Self::unnormalized(keep.len(), self.n_max, terms)
    }

    /// Applies the annihilation operator of mode `m` (unnormalized result).
    fn annihilate(&self, m: usize) -> FockState {
        let mut amps = BTreeMap::new();
        for (k, v) in &self.amps {
            if k[m] > 0 {
                let mut k2 = k.clone();
                k2[m] -= 1;
                *amps.entry(k2).or_insert(ZERO) += v * (k[m] as f64).sqrt();
            }
        }
        FockState {
            modes: self.modes,
            n_max: self.n_max,
            amps,
        }
    }

    fn add(&self, other: &FockState) -> FockState {
        let mut amps = self.amps.clone();
        for (k, v) in &other.amps {
            *amps.entry(k.clone()).or_insert(ZERO) += v;
        }
        FockState {
            modes: self.modes,
            n_max: self.n_max,
            amps,
        }
    }

    /// JSON array of {occupation, re, im}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms()
                .map(|(occ, c)| serde_json::json!({"occupation": occ, "re": c.re, "im": c.im}))
                .collect(),
        )
    }
}

/// Rewrites every incoming creation operator through the conjugate of the
/// scattering matrix, a†_j → Σ_k S*_jk a†_k, and expands over the vacuum.
/// Mode order is (x1, x2, y1, y2).
pub fn transform_state(s: &SMatrix4, input: &FockState) -> Result<FockState> {
    if input.modes != 4 {
        return Err(Error::Validation(format!(
            "scattering acts on 4 modes, state has {}",
            input.modes
        )));
    }
    let m = s.matrix();
    let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
    for (occ, amp) in &input.amps {
        // Polynomial in outgoing creation operators: monomial exponents → coefficient.
        let mut poly: BTreeMap<[u32; 4], Complex64> = BTreeMap::new();
        poly.insert([0; 4], amp / occ.iter().map(|&n| factorial(n as usize).sqrt()).product::<f64>());
        for (j, &count) in occ.iter().enumerate() {
            for _ in 0..count {
                let mut next = BTreeMap::new();
                for (mono, c) in &poly {
                    for (k, row) in m[j].iter().enumerate() {
                        if *row == ZERO {
                            continue;
                        }
                        let mut e = *mono;
                        e[k] += 1;
                        *next.entry(e).or_insert(ZERO) += c * row.conj();
                    }
                }
                poly = next;
            }
        }
        for (mono, c) in poly {
            let weight: f64 = mono.iter().map(|&n| factorial(n as usize).sqrt()).product();
            let v = c * weight;
            if v.norm() <= 1e-300 {
                continue;
            }
            if let Some(&n) = mono.iter().find(|&&n| n as usize > input.n_max) {
                return Err(Error::Capacity {
                    needed: n as usize,
                    n_max: input.n_max,
                });
            }
            *out.entry(mono.iter().map(|&n| n as u8).collect()).or_insert(ZERO) += v;
        }
    }
    out.retain(|_, v| v.norm() > 1e-300);
    let state = FockState {
        modes: 4,
        n_max: input.n_max,
        amps: out,
    };
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::Validation("transformed state vanished".into()));
    }
    Ok(FockState {
        amps: state.amps.into_iter().map(|(k, v)| (k, v / norm)).collect(),
        ..state
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// How the far-zone phase χ relates to ψ = kd cos θ + β; the amplitude of
/// |m n⟩ is multiplied by e^{i(m−n)χ}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FarZonePhase {
    /// χ = ψ/2. A two-photon state |20⟩ + |02⟩ then picks up e^{±iψ}.
    Half,
    /// χ = ψ/4. |20⟩ + |02⟩ picks up e^{±iψ/2}, which yields
    /// G2 = 4 sin⁴θ cos²(ψ/2) for the matched emission state.
    #[default]
    Quarter,
}

impl FarZonePhase {
    fn chi(self, theta: f64, kd: f64, beta: f64) -> f64 {
        let psi = kd * theta.cos() + beta;
        match self {
            FarZonePhase::Half => 0.5 * psi,
            FarZonePhase::Quarter => 0.25 * psi,
        }
    }
}

/// Moves the angular dependence of the array factor into the state. The
/// emitters are the last two modes, so a four-mode (x1, x2, y1, y2) state is
/// handled as well as a two-mode emission state.
pub fn to_far_zone(
    state: &FockState,
    theta: f64,
    kd: f64,
    beta: f64,
    phase: FarZonePhase,
) -> Result<FockState> {
    if state.modes < 2 {
        return Err(Error::Validation(format!(
            "far-zone picture needs two emitter modes, got {} modes",
            state.modes
        )));
    }
    let (e1, e2) = (state.modes - 2, state.modes - 1);
    let chi = phase.chi(theta, kd, beta);
    Ok(FockState {
        amps: state
            .amps
            .iter()
            .map(|(k, v)| {
                let d = k[e1] as f64 - k[e2] as f64;
                (k.clone(), v * Complex64::from_polar(1.0, d * chi))
            })
            .collect(),
        ..state.clone()
    })
}

/// θ samples, spacing and phase shift with the correlation values; a pattern
/// computed for one order leaves the other vector empty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngularPattern {
    pub theta: Vec<f64>,
    pub kd: f64,
    pub beta: f64,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

impl AngularPattern {
    /// CSV `theta_rad,g1,g2`; requires both orders.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        if self.g1.len() != self.theta.len() || self.g2.len() != self.theta.len() {
            return Err(Error::Validation("pattern CSV needs both g1 and g2".into()));
        }
        let rows = (0..self.theta.len()).map(|i| {
            format!("{},{},{}", csv_f64(self.theta[i]), csv_f64(self.g1[i]), csv_f64(self.g2[i]))
        });
        write_lines(out, "theta_rad,g1,g2", rows)
            .map_err(|e| Error::Validation(format!("write failed: {e}")))
    }

    /// Interior local maxima of g2 above 1e−9 of its peak.
    pub fn g2_lobes(&self) -> usize {
        let peak = self.g2.iter().cloned().fold(0.0, f64::max);
        self.g2
            .windows(3)
            .filter(|w| w[1] > w[0] && w[1] >= w[2] && w[1] > 1e-9 * peak)
            .count()
    }
}

/// `points` equally spaced angles on [0, π].
pub fn theta_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| PI * i as f64 / (points - 1) as f64).collect(),
    }
}

/// ‖(a1 + a2)^order ψ‖² with a1, a2 the last two modes.
fn array_factor_moment(state: &FockState, order: usize) -> f64 {
    let (e1, e2) = (state.modes - 2, state.modes - 1);
    let mut s = state.clone();
    for _ in 0..order {
        s = s.annihilate(e1).add(&s.annihilate(e2));
    }
    s.amps.values().map(|v| v.norm_sqr()).sum()
}

fn pattern(
    state: &FockState,
    thetas: &[f64],
    kd: f64,
    beta: f64,
    phase: FarZonePhase,
    orders: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&th| -> Result<Vec<f64>> {
            let rad = to_far_zone(state, th, kd, beta, phase)?;
            let s2 = th.sin().powi(2);
            Ok(orders
                .iter()
                .map(|&o| s2.powi(o as i32) * array_factor_moment(&rad, o))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..orders.len())
        .map(|i| rows.iter().map(|r| r[i]).collect())
        .collect())
}

/// G1(θ) = sin²θ ⟨AF† AF⟩ with AF = y1 + y2 in the far-zone picture.
pub fn g1_pattern(
    state: &FockState,
    thetas: &[f64],
    kd: f64,
    beta: f64,
    phase: FarZonePhase,
) -> Result<AngularPattern> {
    let g = pattern(state, thetas, kd, beta, phase, &[1])?;
    Ok(AngularPattern {
        theta: thetas.to_vec(),
        kd,
        beta,
        g1: g.into_iter().next().unwrap_or_default(),
        g2: Vec::new(),
    })
}

/// G2(θ) = sin⁴θ ⟨AF† AF† AF AF⟩.
pub fn g2_pattern(
    state: &FockState,
    thetas: &[f64],
    kd: f64,
    beta: f64,
    phase: FarZonePhase,
) -> Result<AngularPattern> {
    let g = pattern(state, thetas, kd, beta, phase, &[2])?;
    Ok(AngularPattern {
        theta: thetas.to_vec(),
        kd,
        beta,
        g1: Vec::new(),
        g2: g.into_iter().next().unwrap_or_default(),
    })
}

/// Both correlation orders on one θ grid.
pub fn angular_pattern(
    state: &FockState,
    thetas: &[f64],
    kd: f64,
    beta: f64,
    phase: FarZonePhase,
) -> Result<AngularPattern> {
    let mut g = pattern(state, thetas, kd, beta, phase, &[1, 2])?.into_iter();
    Ok(AngularPattern {
        theta: thetas.to_vec(),
        kd,
        beta,
        g1: g.next().unwrap_or_default(),
        g2: g.next().unwrap_or_default(),
    })
}

/// Mean emitter intensity split into the coherent part ⟨(B x_in)_i† (B x_in)_i⟩
/// per emitter and the vacuum noise term 1 − |r|² − |t1|².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanIntensity {
    pub coherent: [f64; 2],
    pub noise: f64,
}

impl MeanIntensity {
    pub fn total(&self) -> [f64; 2] {
        [self.coherent[0] + self.noise, self.coherent[1] + self.noise]
    }
}

/// `input` is a two-mode state of the feed lines; the emitters' incoming
/// modes are in the vacuum.
pub fn mean_output_intensity(s: &SMatrix4, input: &FockState) -> Result<MeanIntensity> {
    if input.modes != 2 {
        return Err(Error::Validation(format!(
            "feed-line state needs 2 modes, got {}",
            input.modes
        )));
    }
    let b = s.blocks().b;
    let lowered = [input.annihilate(0), input.annihilate(1)];
    let mut coherent = [0.0; 2];
    for (i, slot) in coherent.iter_mut().enumerate() {
        // ⟨ψ| Σ_jk B*_ij B_ik x_j† x_k |ψ⟩ = Σ_jk B*_ij B_ik ⟨x_j ψ | x_k ψ⟩.
        let mut v = ZERO;
        for j in 0..2 {
            for k in 0..2 {
                v += b[i][j].conj() * b[i][k] * lowered[j].overlap(&lowered[k]);
            }
        }
        *slot = v.re;
    }
    Ok(MeanIntensity {
        coherent,
        noise: 1.0 - s.r.norm_sqr() - s.t1.norm_sqr(),
    })
}
