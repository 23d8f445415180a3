//! Finite atomic measures on (0, ∞), completely random measures, Lévy paths
//! and characteristic functions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dist::{poisson, uniform};
use crate::error::{invalid, Error, Result};
use crate::generators::half_edge_total;
use crate::multigraph::Multigraph;
use crate::rng::Rng;

/// `Σ m_k δ_{x_k}` with strictly increasing locations `x_k > 0` and masses
/// `m_k > 0`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
    // suffix[j] = Σ_{k >= j} m_k, with a trailing 0
    suffix: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn empty() -> Self {
        DiscreteMeasure {
            atoms: Vec::new(),
            suffix: vec![0.0],
        }
    }

    /// Sorts the atoms and merges equal locations.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = atoms.into_iter().collect();
        for &(x, m) in &v {
            if !(x > 0.0 && x.is_finite() && m > 0.0 && m.is_finite()) {
                return invalid(format!(
                    "atom ({x}, {m}) needs positive finite location and mass"
                ));
            }
        }
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (x, m) in v {
            match atoms.last_mut() {
                Some(last) if last.0 == x => last.1 += m,
                _ => atoms.push((x, m)),
            }
        }
        let mut suffix = vec![0.0; atoms.len() + 1];
        for j in (0..atoms.len()).rev() {
            suffix[j] = suffix[j + 1] + atoms[j].1;
        }
        Ok(DiscreteMeasure { atoms, suffix })
    }

    /// `(1/s) Σ_i δ_{v_i / s}` over the positive values.
    pub fn scaled_counts(values: &[f64], s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return invalid("scale must be positive");
        }
        DiscreteMeasure::new(
            values
                .iter()
                .filter(|&&v| v > 0.0)
                .map(|&v| (v / s, 1.0 / s)),
        )
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.suffix[0]
    }

    /// `∫ x dρ`.
    pub fn first_moment(&self) -> f64 {
        self.atoms.iter().map(|&(x, m)| x * m).sum()
    }

    /// `∫ x² dρ`.
    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|&(x, m)| x * x * m).sum()
    }

    /// `b = ∫ (x ∧ 1) dρ`.
    pub fn b_value(&self) -> f64 {
        self.atoms.iter().map(|&(x, m)| m * x.min(1.0)).sum()
    }

    /// `ρ̄(x) = ρ((x, ∞))`.
    pub fn tail_intensity(&self, x: f64) -> f64 {
        let j = self.atoms.partition_point(|a| a.0 <= x);
        self.suffix[j]
    }

    /// `inf { x >= 0 : ρ̄(x) <= y }`, with the value 0 at `y = 0`.
    pub fn tail_inverse(&self, y: f64) -> f64 {
        if y <= 0.0 || y >= self.total_mass() {
            return 0.0;
        }
        // ρ̄ equals suffix[j+1] on [x_j, x_{j+1}); find the first j with
        // suffix[j+1] <= y
        let j = self.suffix[1..].partition_point(|&s| s > y);
        self.atoms[j].0
    }

    /// `∫_{[0, ε]} x dρ`.
    pub fn low_mass_estimate(&self, eps: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|a| a.0 <= eps)
            .map(|&(x, m)| x * m)
            .sum()
    }

    /// Atoms strictly above `tau`.
    pub fn restrict_above(&self, tau: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(self.atoms.iter().copied().filter(|a| a.0 > tau))
            .expect("atoms already valid")
    }

    /// Measure with every location multiplied by `f > 0`.
    pub fn scale_locations(&self, f: f64) -> DiscreteMeasure {
        DiscreteMeasure::new(self.atoms.iter().map(|&(x, m)| (x * f, m))).expect("f > 0")
    }

    /// `(b, σ, ρ)` with `σ = 0`.
    pub fn levy_triplet(&self) -> LevyTriplet {
        LevyTriplet {
            b: self.b_value(),
            sigma: 0.0,
            rho: self.clone(),
        }
    }

    pub fn to_json_value(&self, drift: Option<f64>) -> MeasureJson {
        MeasureJson {
            atoms: self.atoms.iter().map(|&(x, m)| [x, m]).collect(),
            a: drift,
        }
    }

    pub fn from_json(s: &str) -> Result<(DiscreteMeasure, Option<f64>)> {
        let raw: MeasureJson = serde_json::from_str(s)?;
        Ok((raw.to_measure()?, raw.a))
    }

    /// CSV with header `x,mass`.
    pub fn read_csv<R: std::io::Read>(r: R) -> Result<DiscreteMeasure> {
        let mut rd = csv::Reader::from_reader(r);
        let mut atoms = Vec::new();
        for rec in rd.deserialize::<(f64, f64)>() {
            atoms.push(rec?);
        }
        DiscreteMeasure::new(atoms)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["x", "mass"])?;
        for &(x, m) in &self.atoms {
            out.serialize((x, m))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Wire form `{atoms: [[x, mass], ...], a: optional drift}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeasureJson {
    pub atoms: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

impl MeasureJson {
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.atoms.iter().map(|a| (a[0], a[1])))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyTriplet {
    pub b: f64,
    pub sigma: f64,
    pub rho: DiscreteMeasure,
}

/// `ρ_n = (1/√ℓ) Σ δ_{d_i/√ℓ}`.
pub fn empirical_degree_measure(d: &[u32]) -> Result<DiscreteMeasure> {
    let l = half_edge_total(d)?;
    if l == 0 {
        return Ok(DiscreteMeasure::empty());
    }
    let vals: Vec<f64> = d.iter().map(|&x| x as f64).collect();
    DiscreteMeasure::scaled_counts(&vals, (l as f64).sqrt())
}

/// Drift `a` plus atoms `(θ, w)` on `[0, T]`, sorted by location.
#[derive(Clone, Debug, PartialEq)]
pub struct CrmSample {
    pub drift: f64,
    pub horizon: f64,
    pub atoms: Vec<(f64, f64)>,
}

impl CrmSample {
    /// `μ([lo, hi])` for `0 <= lo <= hi <= T`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        self.drift * (hi - lo)
            + self
                .atoms
                .iter()
                .filter(|a| a.0 >= lo && a.0 <= hi)
                .map(|a| a.1)
                .sum::<f64>()
    }

    pub fn to_path(&self) -> LevyPath {
        LevyPath::new(self.drift, self.horizon, self.atoms.clone())
    }
}

/// Poisson(`T m_k`) atoms of weight `x_k` at independent uniform locations.
pub fn sample_crm(rho: &DiscreteMeasure, a: f64, horizon: f64, rng: &mut Rng) -> Result<CrmSample> {
    if !(a >= 0.0) || !(horizon >= 0.0) {
        return invalid("drift and horizon must be nonnegative");
    }
    let mut atoms = Vec::new();
    for &(x, m) in rho.atoms() {
        for _ in 0..poisson(rng, horizon * m) {
            atoms.push((uniform(rng, horizon), x));
        }
    }
    atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(CrmSample {
        drift: a,
        horizon,
        atoms,
    })
}

/// `Y(t) = a t + Σ_{θ_i <= t} w_i` on `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyPath {
    drift: f64,
    horizon: f64,
    jumps: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
}

impl LevyPath {
    pub fn new(drift: f64, horizon: f64, mut jumps: Vec<(f64, f64)>) -> Self {
        jumps.sort_by(|p, q| p.0.total_cmp(&q.0));
        let mut cumulative = Vec::with_capacity(jumps.len());
        let mut s = 0.0;
        for j in &jumps {
            s += j.1;
            cumulative.push(s);
        }
        LevyPath {
            drift,
            horizon,
            jumps,
            cumulative,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jumps(&self) -> &[(f64, f64)] {
        &self.jumps
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.jumps.partition_point(|j| j.0 <= t);
        let jumps = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        self.drift * t + jumps
    }

    /// `(t, Y(t))` on an even grid of `points` values over `[0, T]`.
    pub fn samples(&self, points: usize) -> Vec<(f64, f64)> {
        let points = points.max(2);
        (0..points)
            .map(|i| {
                let t = self.horizon * i as f64 / (points - 1) as f64;
                (t, self.eval(t))
            })
            .collect()
    }
}

/// `Y_n(t) = (1/√ℓ) Σ d_i 1{U_i <= t}` with `U_i` uniform on `[0, √ℓ]`.
pub fn levy_path_from_sequence(d: &[u32], rng: &mut Rng) -> Result<LevyPath> {
    let l = half_edge_total(d)? as f64;
    let s = l.sqrt();
    let jumps = d.iter().map(|&x| (uniform(rng, s), x as f64 / s)).collect();
    Ok(LevyPath::new(0.0, s, jumps))
}

/// `exp(iθ a λ(A) + λ(A) ∫ (e^{iθx} - 1) ρ(dx))`.
pub fn crm_char_function(rho: &DiscreteMeasure, a: f64, leb_a: f64, theta: f64) -> Complex64 {
    let mut exponent = Complex64::new(0.0, theta * a * leb_a);
    for &(x, m) in rho.atoms() {
        let e = Complex64::new(0.0, theta * x).exp() - 1.0;
        exponent += e * (leb_a * m);
    }
    exponent.exp()
}

/// `(1/e(G)) Σ_{v : d_v <= δ √e(G)} d_v`.
pub fn tail_regularity_deficit(g: &Multigraph, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument("δ must be positive".into()));
    }
    let e = g.non_loop_edge_count();
    if e == 0 {
        return Err(Error::NoEdges);
    }
    let cut = delta * (e as f64).sqrt();
    let low: u64 = g.degrees().into_iter().filter(|&d| d as f64 <= cut).sum();
    Ok(low as f64 / e as f64)
}
