use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | j m⟩` for integer angular
/// momenta (Condon–Shortley phase). Returns 0 for forbidden combinations.
pub fn clebsch_gordan(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    if j1 < 0 || j2 < 0 || j < 0 {
        return 0.0;
    }
    if m1 + m2 != m || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if j < (j1 - j2).abs() || j > j1 + j2 {
        return 0.0;
    }
    let pre = ((2 * j + 1) as f64
        * factorial(j + j1 - j2)
        * factorial(j - j1 + j2)
        * factorial(j1 + j2 - j)
        / factorial(j1 + j2 + j + 1))
    .sqrt();
    let norm = (factorial(j + m)
        * factorial(j - m)
        * factorial(j1 - m1)
        * factorial(j1 + m1)
        * factorial(j2 - m2)
        * factorial(j2 + m2))
    .sqrt();
    let k_min = 0.max(j2 - j - m1).max(j1 - j + m2);
    let k_max = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign
            / (factorial(k)
                * factorial(j1 + j2 - j - k)
                * factorial(j1 - m1 - k)
                * factorial(j2 + m2 - k)
                * factorial(j - j2 + m1 + k)
                * factorial(j - j1 - m2 + k));
    }
    pre * norm * sum
}

/// One ground/excited sublevel pair driven by a circular signal photon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipolePair {
    pub excited: i32,
    pub ground: i32,
    /// Initial population of the ground sublevel.
    pub eta: f64,
    /// Relative dipole weight, strongest transition = 1.
    pub weight: f64,
}

impl DipolePair {
    pub fn strength(&self) -> f64 {
        self.eta * self.weight
    }
}

/// Hyperfine manifold `F_g → F_e` with ground-state populations and
/// relative dipole weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme", into = "RawScheme")]
pub struct ZeemanScheme {
    f_g: i32,
    f_e: i32,
    populations: Vec<f64>,
    // row-major over (m + f_e, n + f_g)
    weights: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScheme {
    f_g: i32,
    f_e: i32,
    #[serde(default)]
    populations: Option<Vec<f64>>,
}

impl TryFrom<RawScheme> for ZeemanScheme {
    type Error = Error;

    fn try_from(raw: RawScheme) -> Result<Self> {
        match raw.populations {
            Some(p) => ZeemanScheme::new(raw.f_g, raw.f_e, p),
            None => ZeemanScheme::uniform(raw.f_g, raw.f_e),
        }
    }
}

impl From<ZeemanScheme> for RawScheme {
    fn from(s: ZeemanScheme) -> Self {
        RawScheme {
            f_g: s.f_g,
            f_e: s.f_e,
            populations: Some(s.populations),
        }
    }
}

impl Default for ZeemanScheme {
    fn default() -> Self {
        ZeemanScheme::uniform(2, 3).expect("F=2 -> F'=3 is a valid manifold")
    }
}

impl ZeemanScheme {
    pub fn new(f_g: i32, f_e: i32, populations: Vec<f64>) -> Result<Self> {
        if f_g < 0 || f_e < 0 || f_g + f_e == 0 || (f_e - f_g).abs() > 1 {
            return Err(Error::param(
                "zeeman",
                format!("no dipole transition between F_g={f_g} and F_e={f_e}"),
            ));
        }
        if populations.len() != (2 * f_g + 1) as usize {
            return Err(Error::param(
                "populations",
                format!(
                    "expected {} entries, got {}",
                    2 * f_g + 1,
                    populations.len()
                ),
            ));
        }
        if populations.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::param(
                "populations",
                "entries must be finite and nonnegative",
            ));
        }
        let total: f64 = populations.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "populations",
                format!("sum to {total}, not 1"),
            ));
        }

        let ne = (2 * f_e + 1) as usize;
        let ng = (2 * f_g + 1) as usize;
        let mut weights = vec![0.0; ne * ng];
        for m in -f_e..=f_e {
            for n in -f_g..=f_g {
                let q = m - n;
                if q.abs() <= 1 {
                    let cg = clebsch_gordan(f_g, n, 1, q, f_e, m);
                    weights[(m + f_e) as usize * ng + (n + f_g) as usize] = cg * cg;
                }
            }
        }
        let max = weights.iter().cloned().fold(0.0, f64::max);
        weights.iter_mut().for_each(|w| *w /= max);

        Ok(ZeemanScheme {
            f_g,
            f_e,
            populations,
            weights,
        })
    }

    pub fn uniform(f_g: i32, f_e: i32) -> Result<Self> {
        let n = (2 * f_g.max(0) + 1) as usize;
        ZeemanScheme::new(f_g, f_e, vec![1.0 / n as f64; n])
    }

    pub fn f_g(&self) -> i32 {
        self.f_g
    }

    pub fn f_e(&self) -> i32 {
        self.f_e
    }

    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    /// Population of ground sublevel `n`; zero outside the manifold.
    pub fn eta(&self, n: i32) -> f64 {
        if n.abs() > self.f_g {
            0.0
        } else {
            self.populations[(n + self.f_g) as usize]
        }
    }

    /// Relative dipole weight `G_{m,n}`; zero outside the manifold.
    pub fn weight(&self, m: i32, n: i32) -> f64 {
        if m.abs() > self.f_e || n.abs() > self.f_g {
            return 0.0;
        }
        let ng = (2 * self.f_g + 1) as usize;
        self.weights[(m + self.f_e) as usize * ng + (n + self.f_g) as usize]
    }

    /// Allowed pairs `(n + Δm, n)` for a signal photon changing m by `delta_m`.
    ///
    /// Pairs are ordered along Δm, so the last one is the stretched
    /// transition at the edge of the manifold.
    pub fn pairs(&self, delta_m: i32) -> Result<Vec<DipolePair>> {
        if delta_m.abs() != 1 {
            return Err(Error::param(
                "delta_m",
                format!("must be +1 or -1, got {delta_m}"),
            ));
        }
        let grounds: Vec<i32> = if delta_m > 0 {
            (-self.f_g..=self.f_g).collect()
        } else {
            (-self.f_g..=self.f_g).rev().collect()
        };
        Ok(grounds
            .into_iter()
            .filter(|n| (n + delta_m).abs() <= self.f_e)
            .map(|n| DipolePair {
                excited: n + delta_m,
                ground: n,
                eta: self.eta(n),
                weight: self.weight(n + delta_m, n),
            })
            .collect())
    }

    /// Helicity-averaged total dipole strength
    /// `½ Σ_n η_n (G_{n+1,n} + G_{n−1,n})`.
    pub fn reference_weight(&self) -> f64 {
        (-self.f_g..=self.f_g)
            .map(|n| 0.5 * self.eta(n) * (self.weight(n + 1, n) + self.weight(n - 1, n)))
            .sum()
    }
}
