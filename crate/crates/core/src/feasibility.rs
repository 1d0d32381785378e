//! Feasibility of small systems `a . t <= b` by Fourier–Motzkin elimination.

/// Slack allowed when deciding `0 <= b` after all variables are gone.
/// Touching constraints (shared cube faces) must count as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }
}

/// Collects the constraints `lo <= coeffs . t + offset <= hi`.
#[derive(Debug, Clone, Default)]
pub struct System {
    vars: usize,
    rows: Vec<Constraint>,
}

impl System {
    pub fn new(vars: usize) -> Self {
        Self { vars, rows: Vec::new() }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn push(&mut self, c: Constraint) {
        debug_assert_eq!(c.coeffs.len(), self.vars);
        self.rows.push(c);
    }

    /// `lo <= t_var <= hi`
    pub fn bound_var(&mut self, var: usize, lo: f64, hi: f64) {
        let mut up = vec![0.0; self.vars];
        up[var] = 1.0;
        let mut down = vec![0.0; self.vars];
        down[var] = -1.0;
        self.rows.push(Constraint::new(up, hi));
        self.rows.push(Constraint::new(down, -lo));
    }

    /// `lo <= coeffs . t + offset <= hi`
    pub fn bound_affine(&mut self, coeffs: &[f64], offset: f64, lo: f64, hi: f64) {
        self.rows.push(Constraint::new(coeffs.to_vec(), hi - offset));
        self.rows
            .push(Constraint::new(coeffs.iter().map(|c| -c).collect(), offset - lo));
    }

    pub fn is_feasible(&self) -> bool {
        feasible(self.vars, self.rows.clone())
    }
}

/// Eliminates the variables one at a time. Rows are rescaled so the
/// eliminated coefficient is ±1 before pairing, which keeps magnitudes tame.
pub fn feasible(vars: usize, mut rows: Vec<Constraint>) -> bool {
    for var in (0..vars).rev() {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut rest = Vec::new();
        for row in rows {
            let c = row.coeffs[var];
            if c.abs() <= f64::EPSILON * 16.0 {
                rest.push(row);
            } else {
                let scale = 1.0 / c.abs();
                let scaled = Constraint::new(
                    row.coeffs.iter().map(|x| x * scale).collect(),
                    row.rhs * scale,
                );
                if c > 0.0 {
                    pos.push(scaled);
                } else {
                    neg.push(scaled);
                }
            }
        }
        for p in &pos {
            for q in &neg {
                let mut coeffs: Vec<f64> =
                    p.coeffs.iter().zip(&q.coeffs).map(|(a, b)| a + b).collect();
                coeffs[var] = 0.0;
                rest.push(Constraint::new(coeffs, p.rhs + q.rhs));
            }
        }
        // Rows with no variables left decide immediately.
        let mut kept = Vec::with_capacity(rest.len());
        for row in rest {
            if row.coeffs.iter().all(|c| c.abs() <= f64::EPSILON * 16.0) {
                if row.rhs < -FEASIBILITY_TOL {
                    return false;
                }
            } else {
                kept.push(row);
            }
        }
        rows = kept;
    }
    rows.iter().all(|r| r.rhs >= -FEASIBILITY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_overlap() {
        let mut s = System::new(1);
        s.bound_var(0, 0.0, 1.0);
        s.bound_affine(&[2.0], 0.0, 1.5, 3.0);
        assert!(s.is_feasible());
        let mut s = System::new(1);
        s.bound_var(0, 0.0, 1.0);
        s.bound_affine(&[2.0], 0.0, 2.5, 3.0);
        assert!(!s.is_feasible());
    }

    #[test]
    fn touching_counts() {
        let mut s = System::new(1);
        s.bound_var(0, 0.0, 0.5);
        s.bound_var(0, 0.5, 1.0);
        assert!(s.is_feasible());
    }

    #[test]
    fn triangle_in_plane() {
        // t0 + t1 <= 1, t0 >= 0.6, t1 >= 0.6 is empty
        let mut s = System::new(2);
        s.push(Constraint::new(vec![1.0, 1.0], 1.0));
        s.bound_var(0, 0.6, 10.0);
        s.bound_var(1, 0.6, 10.0);
        assert!(!s.is_feasible());
        let mut s = System::new(2);
        s.push(Constraint::new(vec![1.0, 1.0], 1.0));
        s.bound_var(0, 0.4, 10.0);
        s.bound_var(1, 0.4, 10.0);
        assert!(s.is_feasible());
    }

    #[test]
    fn no_variables() {
        assert!(feasible(0, vec![Constraint::new(vec![], 0.0)]));
        assert!(!feasible(0, vec![Constraint::new(vec![], -1.0)]));
    }
}
