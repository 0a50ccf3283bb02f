use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::EigenDecomposition;
use crate::quantum::{expectation_pure, populations, Observable, PureState};

/// Fraction of the energy breadth covered by each benchmark window.
pub const WINDOW_FRACTION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Low,
    Mid,
    High,
}

impl WindowKind {
    pub const ALL: [WindowKind; 3] = [WindowKind::Low, WindowKind::Mid, WindowKind::High];

    pub fn name(self) -> &'static str {
        match self {
            WindowKind::Low => "low",
            WindowKind::Mid => "mid",
            WindowKind::High => "high",
        }
    }
}

impl std::fmt::Display for WindowKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(WindowKind::Low),
            "mid" => Ok(WindowKind::Mid),
            "high" => Ok(WindowKind::High),
            other => Err(Error::Config(format!("unknown window '{other}'"))),
        }
    }
}

/// Closed energy interval `[ε_min, ε_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindow {
    pub eps_min: f64,
    pub eps_max: f64,
}

impl EnergyWindow {
    pub fn new(eps_min: f64, eps_max: f64) -> Result<Self> {
        if !(eps_min.is_finite() && eps_max.is_finite()) || eps_min >= eps_max {
            return Err(Error::InvalidWindow {
                eps_min,
                eps_max,
                reason: "bounds must be finite with eps_min < eps_max".into(),
            });
        }
        Ok(EnergyWindow { eps_min, eps_max })
    }

    /// Checks that the window lies within `[e_min, e_max]`.
    ///
    /// The end windows share an endpoint with the spectrum, so the bound is
    /// inclusive.
    pub fn check_viable(&self, e_min: f64, e_max: f64) -> Result<()> {
        let slack = 1e-12 * (e_max - e_min).abs().max(1.0);
        if self.eps_min < e_min - slack || self.eps_max > e_max + slack {
            return Err(Error::InvalidWindow {
                eps_min: self.eps_min,
                eps_max: self.eps_max,
                reason: format!("outside the spectrum [{e_min}, {e_max}]"),
            });
        }
        Ok(())
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.eps_min + self.eps_max)
    }

    pub fn width(&self) -> f64 {
        self.eps_max - self.eps_min
    }

    /// Strictly inside.
    pub fn contains(&self, e: f64) -> bool {
        self.eps_min < e && e < self.eps_max
    }

    /// `[lo, hi] ⊆ [ε_min, ε_max]`.
    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        self.eps_min <= lo && hi <= self.eps_max
    }
}

/// Bottom, median or top 15% of `[e_min, e_max]`.
pub fn select_window(e_min: f64, e_max: f64, which: WindowKind) -> Result<EnergyWindow> {
    let breadth = e_max - e_min;
    if !(breadth.is_finite() && breadth > 0.0) {
        return Err(Error::invalid(format!(
            "empty energy range [{e_min}, {e_max}]"
        )));
    }
    let w = WINDOW_FRACTION * breadth;
    let window = match which {
        WindowKind::Low => EnergyWindow::new(e_min, e_min + w)?,
        WindowKind::Mid => {
            let c = e_min + 0.5 * breadth;
            EnergyWindow::new(c - 0.5 * w, c + 0.5 * w)?
        }
        WindowKind::High => EnergyWindow::new(e_max - w, e_max)?,
    };
    window.check_viable(e_min, e_max)?;
    Ok(window)
}

/// Mean energy strictly inside the window.
pub fn variant1_member(psi: &PureState, h: &Observable, w: &EnergyWindow) -> Result<bool> {
    Ok(w.contains(expectation_pure(psi, h)?))
}

pub const DEFAULT_SUPPORT_TOL: f64 = 1e-10;

/// Total population on eigenvalues outside the window is at most `support_tol`.
pub fn variant2_member(
    psi: &PureState,
    eigen: &EigenDecomposition,
    w: &EnergyWindow,
    support_tol: f64,
) -> Result<bool> {
    check_dim(eigen.dim(), psi.dim())?;
    let p = populations(psi, eigen)?;
    let outside: f64 = p
        .iter()
        .zip(&eigen.energies)
        .filter(|(_, &e)| e < w.eps_min || e > w.eps_max)
        .map(|(p, _)| p)
        .sum();
    Ok(outside <= support_tol)
}
