//! Truncated univariate power series over f64, used for Taylor coefficients
//! of the smooth primitives and for implicit-function jets.

#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, n: usize) -> Jet {
        let mut c = vec![0.0; n + 1];
        c[0] = v;
        Jet { c }
    }

    /// `x0 + t`.
    pub fn variable(x0: f64, n: usize) -> Jet {
        let mut j = Jet::constant(x0, n);
        if n >= 1 {
            j.c[1] = 1.0;
        }
        j
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet {
            c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn neg(&self) -> Jet {
        Jet {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.degree().min(o.degree());
        let mut c = vec![0.0; n + 1];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (0..=i).map(|j| self.c[j] * o.c[i - j]).sum();
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Option<Jet> {
        if o.c[0] == 0.0 {
            return None;
        }
        let n = self.degree().min(o.degree());
        let mut c = vec![0.0; n + 1];
        for k in 0..=n {
            let s: f64 = (1..=k).map(|j| o.c[j] * c[k - j]).sum();
            c[k] = (self.c[k] - s) / o.c[0];
        }
        Some(Jet { c })
    }

    pub fn powi(&self, k: i32) -> Option<Jet> {
        let mut acc = Jet::constant(1.0, self.degree());
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(self);
        }
        if k < 0 {
            Jet::constant(1.0, self.degree()).div(&acc)
        } else {
            Some(acc)
        }
    }

    pub fn exp(&self) -> Jet {
        let n = self.degree();
        let mut b = vec![0.0; n + 1];
        b[0] = self.c[0].exp();
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * b[k - j]).sum();
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    pub fn ln(&self) -> Option<Jet> {
        if self.c[0] <= 0.0 {
            return None;
        }
        let n = self.degree();
        let mut b = vec![0.0; n + 1];
        b[0] = self.c[0].ln();
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| j as f64 * b[j] * self.c[k - j]).sum();
            b[k] = (self.c[k] - s / k as f64) / self.c[0];
        }
        Some(Jet { c: b })
    }

    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.degree();
        let mut s = vec![0.0; n + 1];
        let mut c = vec![0.0; n + 1];
        s[0] = self.c[0].sin();
        c[0] = self.c[0].cos();
        for k in 1..=n {
            let mut ss = 0.0;
            let mut cc = 0.0;
            for j in 1..=k {
                ss += j as f64 * self.c[j] * c[k - j];
                cc += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = ss / k as f64;
            c[k] = -cc / k as f64;
        }
        (Jet { c: s }, Jet { c })
    }

    pub fn sqrt(&self) -> Option<Jet> {
        if self.c[0] <= 0.0 {
            return None;
        }
        let n = self.degree();
        let mut b = vec![0.0; n + 1];
        b[0] = self.c[0].sqrt();
        for k in 1..=n {
            let s: f64 = (1..k).map(|j| b[j] * b[k - j]).sum();
            b[k] = (self.c[k] - s) / (2.0 * b[0]);
        }
        Some(Jet { c: b })
    }

    /// Horner evaluation at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, a| acc * t + a)
    }
}
