use crate::scalar::Scalar;

/// Node slopes of the natural cubic spline through `y` on a uniform grid with
/// spacing `d`.
pub(crate) fn natural_slopes(y: &[f64], d: f64) -> Vec<f64> {
    let m = y.len();
    assert!(m >= 2, "spline needs at least two nodes");
    // Second derivatives: M₀ = M_{m−1} = 0 and
    // M_{i−1} + 4M_i + M_{i+1} = 6(y_{i+1} − 2y_i + y_{i−1})/d².
    let mut second = vec![0.0; m];
    if m > 2 {
        let k = m - 2;
        let mut diag = vec![4.0; k];
        let mut rhs: Vec<f64> = (1..m - 1).map(|i| 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (d * d)).collect();
        for r in 1..k {
            let w = 1.0 / diag[r - 1];
            diag[r] -= w;
            rhs[r] -= w * rhs[r - 1];
        }
        second[k] = rhs[k - 1] / diag[k - 1];
        for r in (0..k - 1).rev() {
            second[r + 1] = (rhs[r] - second[r + 2]) / diag[r];
        }
    }
    let mut slopes = Vec::with_capacity(m);
    for i in 0..m - 1 {
        slopes.push((y[i + 1] - y[i]) / d - d * (2.0 * second[i] + second[i + 1]) / 6.0);
    }
    slopes.push((y[m - 1] - y[m - 2]) / d + d * (second[m - 2] + 2.0 * second[m - 1]) / 6.0);
    slopes
}

/// Tensor-product natural cubic spline on the uniform square grid over
/// `[−1, 1]²`, held as bicubic Hermite patches.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct BicubicSpline {
    n: usize,
    d: f64,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

impl BicubicSpline {
    /// `values` is `n × n`, row-major, row index along `y`.
    pub(crate) fn new(n: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), n * n);
        let d = 2.0 / (n - 1) as f64;
        let mut fx = vec![0.0; n * n];
        for i in 0..n {
            let s = natural_slopes(&values[i * n..(i + 1) * n], d);
            fx[i * n..(i + 1) * n].copy_from_slice(&s);
        }
        let along_y = |src: &[f64]| {
            let mut out = vec![0.0; n * n];
            for j in 0..n {
                let col: Vec<f64> = (0..n).map(|i| src[i * n + j]).collect();
                for (i, s) in natural_slopes(&col, d).into_iter().enumerate() {
                    out[i * n + j] = s;
                }
            }
            out
        };
        let fy = along_y(values);
        let fxy = along_y(&fx);
        BicubicSpline { n, d, f: values.to_vec(), fx, fy, fxy }
    }

    fn locate(&self, c: f64) -> usize {
        let u = (c + 1.0) / self.d;
        (u.floor().max(0.0) as usize).min(self.n - 2)
    }

    /// Evaluates at `(x, y) ∈ [−1, 1]²`; the caller checks the domain.
    pub(crate) fn eval<T: Scalar>(&self, x: T, y: T) -> T {
        let j = self.locate(x.value());
        let i = self.locate(y.value());
        let tx = (x + 1.0) / self.d - j as f64;
        let ty = (y + 1.0) / self.d - i as f64;
        let bx = hermite(tx);
        let by = hermite(ty);
        let n = self.n;
        let d = self.d;
        let mut acc = T::zero();
        for (b, &(h0y, h1y)) in by.iter().enumerate() {
            for (a, &(h0x, h1x)) in bx.iter().enumerate() {
                let k = (i + b) * n + (j + a);
                acc = acc
                    + h0x * h0y * self.f[k]
                    + h1x * h0y * (d * self.fx[k])
                    + h0x * h1y * (d * self.fy[k])
                    + h1x * h1y * (d * d * self.fxy[k]);
            }
        }
        acc
    }
}

/// Cubic Hermite basis at `t`: `[(h₀₀, h₁₀), (h₀₁, h₁₁)]`, value and slope
/// weights for the left and right node.
fn hermite<T: Scalar>(t: T) -> [(T, T); 2] {
    let t2 = t * t;
    let t3 = t2 * t;
    [(t3 * 2.0 - t2 * 3.0 + 1.0, t3 - t2 * 2.0 + t), (t2 * 3.0 - t3 * 2.0, t3 - t2)]
}
