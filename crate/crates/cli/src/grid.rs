use std::str::FromStr;

/// `a:b:step` for an arithmetic grid or `a:b:xr` for a geometric one,
/// endpoints included when hit.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub step: Step,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Step {
    Add(f64),
    Mul(f64),
}

/// Points past this many are refused as a typo rather than a request.
const MAX_POINTS: usize = 10_000_000;

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(format!("expected a:b:step or a:b:xratio, got {s:?}"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let (start, end) = (num(a)?, num(b)?);
        let step = match step.trim().strip_prefix('x') {
            Some(r) => Step::Mul(num(r)?),
            None => Step::Add(num(step)?),
        };
        if !start.is_finite() || !end.is_finite() || start > end {
            return Err(format!("grid needs finite a <= b, got {a}..{b}"));
        }
        match step {
            Step::Add(h) if !(h > 0.0 && h.is_finite()) => return Err(format!("step must be positive, got {h}")),
            Step::Mul(r) if !(r > 1.0 && r.is_finite()) => return Err(format!("ratio must exceed 1, got {r}")),
            Step::Mul(_) if start <= 0.0 => return Err("a geometric grid must start above 0".into()),
            _ => {}
        }
        let g = Grid { start, end, step };
        let count = match step {
            Step::Add(h) => (end - start) / h,
            Step::Mul(r) => (end / start).ln() / r.ln(),
        };
        if count >= MAX_POINTS as f64 {
            return Err(format!("grid {s} has more than {MAX_POINTS} points"));
        }
        Ok(g)
    }
}

impl Grid {
    pub fn arithmetic(start: f64, end: f64, step: f64) -> Self {
        Self { start, end, step: Step::Add(step) }
    }

    /// The points, each computed from the start so rounding does not drift.
    pub fn points(&self) -> Vec<f64> {
        let slack = 1e-9;
        let mut out = Vec::new();
        for k in 0.. {
            let x = match self.step {
                Step::Add(h) => self.start + k as f64 * h,
                Step::Mul(r) => self.start * r.powi(k),
            };
            let limit = match self.step {
                Step::Add(h) => self.end + slack * h,
                Step::Mul(_) => self.end * (1.0 + slack),
            };
            if x > limit {
                break;
            }
            out.push(x.min(self.end));
        }
        out
    }

    /// The points rounded to integers, which must stay strictly increasing.
    pub fn integers(&self, min: usize) -> Result<Vec<usize>, String> {
        let pts: Vec<usize> = self.points().into_iter().map(|x| x.round() as usize).collect();
        if pts.first().is_some_and(|&n| n < min) {
            return Err(format!("grid must start at {min} or more"));
        }
        if pts.windows(2).any(|w| w[0] >= w[1]) {
            return Err("grid points collide after rounding to integers".into());
        }
        Ok(pts)
    }
}
