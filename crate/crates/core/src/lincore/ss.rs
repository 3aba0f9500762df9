use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;

use super::{FrequencyResponse, LinError};

/// Single-input single-output realization `(A, B, C, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: RowDVector<f64>,
    d: f64,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: RowDVector<f64>,
        d: f64,
    ) -> Result<Self, LinError> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || c.len() != n {
            return Err(LinError::Dimension(format!(
                "A is {}x{}, B has {} rows, C has {} columns",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// Static gain, no states.
    pub fn gain(d: f64) -> Self {
        Self {
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            c: RowDVector::zeros(0),
            d,
        }
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> &RowDVector<f64> {
        &self.c
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    /// `C (sI - A)^-1 B + D` at complex `s`; `None` if `sI - A` is singular.
    pub fn eval(&self, s: Complex64) -> Option<Complex64> {
        let n = self.order();
        if n == 0 {
            return Some(Complex64::new(self.d, 0.0));
        }
        let m = DMatrix::<Complex64>::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = self.b.map(|x| Complex64::new(x, 0.0));
        let x = m.lu().solve(&rhs)?;
        let y: Complex64 = self.c.iter().zip(x.iter()).map(|(c, x)| *c * x).sum();
        Some(y + self.d)
    }

    pub fn eval_freq(&self, omega: f64) -> Result<Complex64, LinError> {
        if !(omega > 0.0) {
            return Err(LinError::NonPositiveFrequency(omega));
        }
        self.eval(Complex64::new(0.0, omega))
            .filter(|v| v.is_finite())
            .ok_or(LinError::PoleOnAxis { omega })
    }

    /// Series connection: `self` feeds `next`. States of `self` come first.
    pub fn series(&self, next: &StateSpace) -> StateSpace {
        let (n1, n2) = (self.order(), next.order());
        let n = n1 + n2;
        let mut a = DMatrix::zeros(n, n);
        a.view_mut((0, 0), (n1, n1)).copy_from(&self.a);
        a.view_mut((n1, n1), (n2, n2)).copy_from(&next.a);
        a.view_mut((n1, 0), (n2, n1))
            .copy_from(&(&next.b * &self.c));
        let mut b = DVector::zeros(n);
        b.rows_mut(0, n1).copy_from(&self.b);
        b.rows_mut(n1, n2).copy_from(&(&next.b * self.d));
        let mut c = RowDVector::zeros(n);
        c.columns_mut(0, n1).copy_from(&(&self.c * next.d));
        c.columns_mut(n1, n2).copy_from(&next.c);
        StateSpace {
            a,
            b,
            c,
            d: self.d * next.d,
        }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        if self.order() == 0 {
            return Vec::new();
        }
        self.a.complex_eigenvalues().iter().copied().collect()
    }

    pub fn is_hurwitz(&self) -> bool {
        self.eigenvalues().iter().all(|ev| ev.re < 0.0)
    }

    /// State matrix of the negative unity-feedback loop `self → plant → -`.
    /// Requires a strictly proper plant (`D = 0`).
    pub fn closed_loop_a(&self, plant: &StateSpace) -> Result<DMatrix<f64>, LinError> {
        if plant.d != 0.0 {
            return Err(LinError::Dimension("plant must be strictly proper".into()));
        }
        let (nc, np) = (self.order(), plant.order());
        let mut a = DMatrix::zeros(nc + np, nc + np);
        a.view_mut((0, 0), (nc, nc)).copy_from(&self.a);
        a.view_mut((0, nc), (nc, np))
            .copy_from(&(-&self.b * &plant.c));
        a.view_mut((nc, 0), (np, nc))
            .copy_from(&(&plant.b * &self.c));
        a.view_mut((nc, nc), (np, np))
            .copy_from(&(&plant.a - &plant.b * &plant.c * self.d));
        Ok(a)
    }
}

impl FrequencyResponse for StateSpace {
    fn response(&self, omega: f64) -> Complex64 {
        self.eval(Complex64::new(0.0, omega))
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }
}

/// Discrete-time realization obtained by a zero-order hold on the input.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStateSpace {
    pub ad: DMatrix<f64>,
    pub bd: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
    pub dt: f64,
}

/// `A_d = exp(A dt)`, `B_d = ∫_0^dt exp(Aτ) dτ B`, both read off the
/// exponential of the augmented matrix `[[A, B], [0, 0]] dt`.
pub fn zoh_discretize(ss: &StateSpace, dt: f64) -> Result<DiscreteStateSpace, LinError> {
    if !(dt > 0.0) {
        return Err(LinError::NonPositiveStep(dt));
    }
    let n = ss.order();
    let mut m = DMatrix::zeros(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&(ss.a() * dt));
    m.view_mut((0, n), (n, 1)).copy_from(&(ss.b() * dt));
    let e = m.exp();
    Ok(DiscreteStateSpace {
        ad: e.view((0, 0), (n, n)).into_owned(),
        bd: e.view((0, n), (n, 1)).column(0).into_owned(),
        c: ss.c().clone(),
        d: ss.d(),
        dt,
    })
}
