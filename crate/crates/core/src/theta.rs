//! Riemann theta functions as truncated lattice sums over `Z^g`, validation
//! of period matrices, and the explicit wave-function formula evaluated over
//! user-supplied period data.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ThetaError {
    #[error("invalid period matrix: {0}")]
    InvalidPeriodMatrix(String),
    #[error("required truncation radius {needed} exceeds the cap {cap} for genus {genus}")]
    TruncationOverflow {
        needed: usize,
        cap: usize,
        genus: usize,
    },
    #[error("theta denominator vanishes within tolerance")]
    ThetaZeroDenominator,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Diagnostics produced by [`validate_period_matrix`].
#[derive(Clone, Debug)]
pub struct PeriodDiagnostics {
    pub symmetry_defect: f64,
    pub min_imag_eigenvalue: f64,
    pub valid: bool,
}

const SYMMETRY_TOL: f64 = 1e-12;

/// A symmetric `g x g` complex matrix with positive definite imaginary part.
#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    genus: usize,
    /// Row-major entries.
    entries: Vec<Complex64>,
    min_imag_eigenvalue: f64,
}

impl PeriodMatrix {
    pub fn new(rows: Vec<Vec<Complex64>>) -> Result<Self, ThetaError> {
        let diag = validate_period_matrix(&rows);
        if !diag.valid {
            return Err(ThetaError::InvalidPeriodMatrix(format!(
                "symmetry defect {:.3e}, smallest imaginary-part eigenvalue {:.3e}",
                diag.symmetry_defect, diag.min_imag_eigenvalue
            )));
        }
        let genus = rows.len();
        let entries = rows.into_iter().flatten().collect();
        Ok(PeriodMatrix {
            genus,
            entries,
            min_imag_eigenvalue: diag.min_imag_eigenvalue,
        })
    }

    /// The empty matrix of genus zero; theta degenerates to 1.
    pub fn genus_zero() -> Self {
        PeriodMatrix {
            genus: 0,
            entries: Vec::new(),
            min_imag_eigenvalue: f64::INFINITY,
        }
    }

    pub fn genus(&self) -> usize {
        self.genus
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.genus + j]
    }

    pub fn min_imag_eigenvalue(&self) -> f64 {
        self.min_imag_eigenvalue
    }

    /// `B * m` for an integer vector `m`.
    pub fn mul_int(&self, m: &[i64]) -> Vec<Complex64> {
        (0..self.genus)
            .map(|i| {
                (0..self.genus)
                    .map(|j| self.entry(i, j) * m[j] as f64)
                    .sum()
            })
            .collect()
    }
}

/// Symmetry and positive-definiteness report for a raw matrix.
pub fn validate_period_matrix(rows: &[Vec<Complex64>]) -> PeriodDiagnostics {
    let g = rows.len();
    if rows.iter().any(|r| r.len() != g) {
        return PeriodDiagnostics {
            symmetry_defect: f64::INFINITY,
            min_imag_eigenvalue: f64::NEG_INFINITY,
            valid: false,
        };
    }
    if g == 0 {
        return PeriodDiagnostics {
            symmetry_defect: 0.0,
            min_imag_eigenvalue: f64::INFINITY,
            valid: true,
        };
    }
    let mut defect = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..g {
        for j in 0..g {
            defect = defect.max((rows[i][j] - rows[j][i]).norm());
            scale = scale.max(rows[i][j].norm());
        }
    }
    let imag: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().map(|z| z.im).collect())
        .collect();
    let min_eig = symmetric_min_eigenvalue(&imag);
    PeriodDiagnostics {
        symmetry_defect: defect,
        min_imag_eigenvalue: min_eig,
        valid: defect <= SYMMETRY_TOL * scale.max(1.0) && min_eig > 0.0,
    }
}

/// Smallest eigenvalue of a small symmetric matrix by cyclic Jacobi
/// rotations.
fn symmetric_min_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().map(|r| {
        r.iter()
            .zip(m.iter().map(|q| q[0]))
            .map(|(&x, _)| x)
            .collect()
    }).collect();
    // Symmetrize defensively against tiny asymmetries.
    for i in 0..n {
        for j in 0..n {
            a[i][j] = 0.5 * (m[i][j] + m[j][i]);
        }
    }
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-15 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).fold(f64::INFINITY, f64::min)
}

/// Truncation caps keeping the lattice enumeration below ~2e6 points.
fn truncation_cap(genus: usize) -> usize {
    match genus {
        0 => 0,
        1 => 1_000_000,
        2 => 700,
        3 => 62,
        4 => 18,
        _ => 8,
    }
}

/// Truncation radius from the tail bound
/// `sum_{|N| > R} exp(-pi lam |N|^2 + 2 pi sqrt(g) |N| y) < tol`
/// with `lam` the smallest eigenvalue of `Im B` and `y = |Im z|_2`.
fn truncation_radius(b: &PeriodMatrix, z: &[Complex64], tol: f64) -> Result<usize, ThetaError> {
    let g = b.genus();
    if g == 0 {
        return Ok(0);
    }
    let lam = b.min_imag_eigenvalue();
    let y: f64 = z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    let sg = (g as f64).sqrt();
    let cap = truncation_cap(g);
    let shell_count = |m: f64| 2.0 * g as f64 * (2.0 * m + 1.0).powi(g as i32 - 1);
    let shell_bound = |m: f64| {
        shell_count(m) * (-std::f64::consts::PI * lam * m * m
            + 2.0 * std::f64::consts::PI * sg * m * y)
            .exp()
    };
    // Walk outward until the geometric-style tail estimate drops below tol.
    let mut r = 1usize;
    loop {
        let s = shell_bound(r as f64 + 1.0);
        let s_next = shell_bound(r as f64 + 2.0);
        if s_next < 0.5 * s && s * 3.0 < tol {
            return Ok(r);
        }
        r += 1;
        if r > cap {
            return Err(ThetaError::TruncationOverflow {
                needed: r,
                cap,
                genus: g,
            });
        }
    }
}

/// The Riemann theta lattice sum
/// `theta(z | B) = sum_N exp(pi i <B N, N> + 2 pi i <N, z>)`, truncated to
/// `|N|_inf <= R` with `R` chosen from the tail bound for the requested
/// tolerance. Shells are summed in order of `|N|_inf`, lexicographically
/// within a shell, so evaluation is deterministic.
pub fn theta(z: &[Complex64], b: &PeriodMatrix, tolerance: f64) -> Result<Complex64, ThetaError> {
    let g = b.genus();
    if z.len() != g {
        return Err(ThetaError::DimensionMismatch(format!(
            "argument length {} != genus {g}",
            z.len()
        )));
    }
    if g == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let radius = truncation_radius(b, z, tolerance)? as i64;

    let mut total = Complex64::new(0.0, 0.0);
    let mut n = vec![-radius; g];
    loop {
        if n.iter().map(|c| c.abs()).max().unwrap() <= radius {
            // pi i <B n, n> + 2 pi i <n, z>
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..g {
                let mut row = Complex64::new(0.0, 0.0);
                for j in 0..g {
                    row += b.entry(i, j) * n[j] as f64;
                }
                quad += row * n[i] as f64;
            }
            let mut lin = Complex64::new(0.0, 0.0);
            for i in 0..g {
                lin += z[i] * n[i] as f64;
            }
            let exponent = Complex64::i() * std::f64::consts::PI * (quad + 2.0 * lin);
            total += exponent.exp();
        }
        // Odometer over the cube [-radius, radius]^g.
        let mut carry = 0;
        while carry < g {
            n[carry] += 1;
            if n[carry] <= radius {
                break;
            }
            n[carry] = -radius;
            carry += 1;
        }
        if carry == g {
            break;
        }
    }
    Ok(total)
}

/// All period data needed by the explicit wave-function formula: Abel-map
/// values, the divisor sum, the vector of Riemann constants, the per
/// direction argument shifts, and the third-kind exponential integrals.
#[derive(Clone, Debug)]
pub struct ThetaFormulaData {
    pub genus: usize,
    pub period: PeriodMatrix,
    /// Abel map at the evaluation point.
    pub abel_gamma: Vec<Complex64>,
    /// Abel map at the normalization point.
    pub abel_rplus: Vec<Complex64>,
    /// Sum of the Abel map over the divisor points.
    pub divisor_abel_sum: Vec<Complex64>,
    /// Vector of Riemann constants.
    pub riemann_constants: Vec<Complex64>,
    /// Argument shift per direction: Abel(A_j^-) - Abel(A_j^+).
    pub direction_shifts: Vec<Vec<Complex64>>,
    /// Third-kind integral from the normalization point to the evaluation
    /// point, one per direction.
    pub exp_integrals: Vec<Complex64>,
}

impl ThetaFormulaData {
    /// Genus-0 degeneration: all theta factors are 1 and the exponential
    /// integrals carry the whole wave function.
    pub fn genus_zero(exp_integrals: Vec<Complex64>) -> Self {
        ThetaFormulaData {
            genus: 0,
            period: PeriodMatrix::genus_zero(),
            abel_gamma: Vec::new(),
            abel_rplus: Vec::new(),
            divisor_abel_sum: Vec::new(),
            riemann_constants: Vec::new(),
            direction_shifts: exp_integrals.iter().map(|_| Vec::new()).collect(),
            exp_integrals,
        }
    }

    fn check_dimensions(&self) -> Result<(), ThetaError> {
        let g = self.genus;
        if self.period.genus() != g {
            return Err(ThetaError::DimensionMismatch(
                "period matrix genus disagrees".into(),
            ));
        }
        for (name, v) in [
            ("abel_gamma", &self.abel_gamma),
            ("abel_rplus", &self.abel_rplus),
            ("divisor_abel_sum", &self.divisor_abel_sum),
            ("riemann_constants", &self.riemann_constants),
        ] {
            if v.len() != g {
                return Err(ThetaError::DimensionMismatch(format!(
                    "{name} has length {} != genus {g}",
                    v.len()
                )));
            }
        }
        if self.direction_shifts.len() != self.exp_integrals.len() {
            return Err(ThetaError::DimensionMismatch(
                "direction shift count != exponential integral count".into(),
            ));
        }
        for s in &self.direction_shifts {
            if s.len() != g {
                return Err(ThetaError::DimensionMismatch(
                    "direction shift has wrong genus".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let c = |v: &[Complex64]| -> Vec<[f64; 2]> { v.iter().map(|z| [z.re, z.im]).collect() };
        let rows: Vec<Vec<[f64; 2]>> = (0..self.genus)
            .map(|i| (0..self.genus).map(|j| {
                let e = self.period.entry(i, j);
                [e.re, e.im]
            }).collect())
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "genus": self.genus,
            "period_matrix": rows,
            "abel_gamma": c(&self.abel_gamma),
            "abel_rplus": c(&self.abel_rplus),
            "divisor_abel_sum": c(&self.divisor_abel_sum),
            "riemann_constants": c(&self.riemann_constants),
            "direction_shifts": self.direction_shifts.iter().map(|s| c(s)).collect::<Vec<_>>(),
            "exp_integrals": c(&self.exp_integrals),
        }))
        .unwrap()
    }

    pub fn from_json(text: &str) -> Result<Self, ThetaError> {
        #[derive(serde::Deserialize)]
        struct Doc {
            genus: usize,
            period_matrix: Vec<Vec<[f64; 2]>>,
            abel_gamma: Vec<[f64; 2]>,
            abel_rplus: Vec<[f64; 2]>,
            divisor_abel_sum: Vec<[f64; 2]>,
            riemann_constants: Vec<[f64; 2]>,
            direction_shifts: Vec<Vec<[f64; 2]>>,
            exp_integrals: Vec<[f64; 2]>,
        }
        let doc: Doc = serde_json::from_str(text)
            .map_err(|e| ThetaError::DimensionMismatch(e.to_string()))?;
        let c = |v: Vec<[f64; 2]>| -> Vec<Complex64> {
            v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()
        };
        let period = if doc.genus == 0 {
            PeriodMatrix::genus_zero()
        } else {
            PeriodMatrix::new(doc.period_matrix.into_iter().map(c).collect())?
        };
        let data = ThetaFormulaData {
            genus: doc.genus,
            period,
            abel_gamma: c(doc.abel_gamma),
            abel_rplus: c(doc.abel_rplus),
            divisor_abel_sum: c(doc.divisor_abel_sum),
            riemann_constants: c(doc.riemann_constants),
            direction_shifts: doc.direction_shifts.into_iter().map(c).collect(),
            exp_integrals: c(doc.exp_integrals),
        };
        data.check_dimensions()?;
        Ok(data)
    }
}

/// Evaluate the explicit wave-function formula:
///
/// `exp(sum_j n_j I_j)
///  * theta(A(gamma) + sum n_j D_j - S - K) / theta(A(gamma) - S - K)
///  * theta(A(R+) - S - K) / theta(A(R+) + sum n_j D_j - S - K)`
///
/// where `I_j` are the third-kind integrals, `D_j` the direction shifts,
/// `S` the divisor Abel sum and `K` the Riemann constants.
pub fn wave_function_theta(
    data: &ThetaFormulaData,
    n: &[i64],
    tolerance: f64,
) -> Result<Complex64, ThetaError> {
    data.check_dimensions()?;
    if n.len() != data.exp_integrals.len() {
        return Err(ThetaError::DimensionMismatch(format!(
            "n has length {} != direction count {}",
            n.len(),
            data.exp_integrals.len()
        )));
    }
    let g = data.genus;

    let mut shift = vec![Complex64::new(0.0, 0.0); g];
    let mut exponent = Complex64::new(0.0, 0.0);
    for (j, &nj) in n.iter().enumerate() {
        exponent += data.exp_integrals[j] * nj as f64;
        for i in 0..g {
            shift[i] += data.direction_shifts[j][i] * nj as f64;
        }
    }

    let arg = |base: &[Complex64], with_shift: bool| -> Vec<Complex64> {
        (0..g)
            .map(|i| {
                let mut v = base[i] - data.divisor_abel_sum[i] - data.riemann_constants[i];
                if with_shift {
                    v += shift[i];
                }
                v
            })
            .collect()
    };

    let num1 = theta(&arg(&data.abel_gamma, true), &data.period, tolerance)?;
    let den1 = theta(&arg(&data.abel_gamma, false), &data.period, tolerance)?;
    let num2 = theta(&arg(&data.abel_rplus, false), &data.period, tolerance)?;
    let den2 = theta(&arg(&data.abel_rplus, true), &data.period, tolerance)?;
    for d in [den1, den2] {
        if d.norm() < 10.0 * tolerance {
            return Err(ThetaError::ThetaZeroDenominator);
        }
    }
    Ok(exponent.exp() * (num1 / den1) * (num2 / den2))
}
