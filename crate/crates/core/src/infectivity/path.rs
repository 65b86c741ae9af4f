use alloc::vec::Vec;

/// One realized infectivity function. On `[zeta, chi)` it is the polynomial
/// `c0 + c1 t + c2 t^2` in the infection age `t`; elsewhere it is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfectivityPath {
    pub zeta: f64,
    pub eta: f64,
    pub chi: f64,
    pub coeffs: [f64; 3],
    pub(crate) onset_jump: bool,
    pub(crate) end_jump: bool,
}

impl InfectivityPath {
    pub(crate) fn new(zeta: f64, chi: f64, coeffs: [f64; 3], onset_jump: bool, end_jump: bool) -> Self {
        InfectivityPath {
            zeta,
            eta: chi - zeta,
            chi,
            coeffs,
            onset_jump: onset_jump && zeta > 0.0,
            end_jump,
        }
    }

    /// Infectivity at age `t` (right-continuous).
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t < self.zeta || t >= self.chi {
            return 0.0;
        }
        let [c0, c1, c2] = self.coeffs;
        (c0 + t * (c1 + t * c2)).max(0.0)
    }

    /// `(zeta, eta, chi)`.
    pub fn durations(&self) -> (f64, f64, f64) {
        (self.zeta, self.eta, self.chi)
    }

    /// Realized jump locations of the path, increasing.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2);
        if self.onset_jump {
            v.push(self.zeta);
        }
        if self.end_jump {
            v.push(self.chi);
        }
        v
    }

    /// Whether the path is constant on its support.
    #[inline]
    pub(crate) fn is_flat(&self) -> bool {
        self.coeffs[1] == 0.0 && self.coeffs[2] == 0.0
    }

    /// The same infectivity seen from age `age` onwards: `t -> eval(age + t)`.
    pub(crate) fn shifted(&self, age: f64) -> Self {
        let [c0, c1, c2] = self.coeffs;
        let coeffs = [c0 + c1 * age + c2 * age * age, c1 + 2.0 * c2 * age, c2];
        let zeta = (self.zeta - age).max(0.0);
        InfectivityPath::new(zeta, self.chi - age, coeffs, self.onset_jump, self.end_jump)
    }
}

/// Free-function form of [`InfectivityPath::eval`].
pub fn eval_path(path: &InfectivityPath, t: f64) -> f64 {
    path.eval(t)
}

/// Free-function form of [`InfectivityPath::durations`].
pub fn path_durations(path: &InfectivityPath) -> (f64, f64, f64) {
    path.durations()
}
