use std::f64::consts::PI;

use super::EvolutionError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// `eps^2 g_E^2 / 2 = 2 pi / k`: electric phases are functions of residues.
    Locked,
    /// Any `eps`, `g_E`; electric phases use the symmetric representative.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagneticFormulation {
    Fourier,
    QwSplit,
    /// Dense exponential through the oracle; tiny systems only.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaquetteOrder {
    EvenThenOdd,
    /// Odd class first, each class in reverse enumeration order.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub eps: f64,
    pub mass: f64,
    pub g_e: f64,
    pub g_m: f64,
    pub k: u32,
    pub coupling: CouplingMode,
    pub magnetic: MagneticFormulation,
    pub plaquette_order: PlaquetteOrder,
}

impl StepConfig {
    /// Locked coupling: `eps` follows from `k` and `g_E`, and
    /// `g_M = 1 / (eps g_E)`.
    pub fn locked(k: u32, g_e: f64, mass: f64) -> Result<StepConfig, EvolutionError> {
        if g_e <= 0.0 {
            return Err(EvolutionError::Config("locked coupling needs g_electric > 0".into()));
        }
        let eps = (4.0 * PI / k as f64).sqrt() / g_e;
        StepConfig {
            eps,
            mass,
            g_e,
            g_m: 1.0 / (eps * g_e),
            k,
            coupling: CouplingMode::Locked,
            magnetic: MagneticFormulation::Fourier,
            plaquette_order: PlaquetteOrder::EvenThenOdd,
        }
        .validated()
    }

    pub fn free(k: u32, eps: f64, mass: f64, g_e: f64, g_m: f64) -> Result<StepConfig, EvolutionError> {
        StepConfig {
            eps,
            mass,
            g_e,
            g_m,
            k,
            coupling: CouplingMode::Free,
            magnetic: MagneticFormulation::Fourier,
            plaquette_order: PlaquetteOrder::EvenThenOdd,
        }
        .validated()
    }

    pub fn with_magnetic(mut self, f: MagneticFormulation) -> StepConfig {
        self.magnetic = f;
        self
    }

    pub fn with_g_m(mut self, g_m: f64) -> StepConfig {
        self.g_m = g_m;
        self
    }

    pub fn with_plaquette_order(mut self, o: PlaquetteOrder) -> StepConfig {
        self.plaquette_order = o;
        self
    }

    pub fn validated(self) -> Result<StepConfig, EvolutionError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(EvolutionError::Config(format!("epsilon must be positive, got {}", self.eps)));
        }
        if self.k < 2 || !self.k.is_multiple_of(2) {
            return Err(EvolutionError::Config(format!("k must be even and >= 2, got {}", self.k)));
        }
        if self.coupling == CouplingMode::Locked {
            let lhs = self.electric_alpha();
            let rhs = 2.0 * PI / self.k as f64;
            if (lhs - rhs).abs() > 1e-12 * rhs {
                return Err(EvolutionError::Config(format!(
                    "locked coupling requires eps^2 g_E^2 / 2 = 2 pi / k, got {lhs} vs {rhs}"
                )));
            }
        }
        Ok(self)
    }

    /// `eps^2 g_E^2 / 2`.
    pub fn electric_alpha(&self) -> f64 {
        self.eps * self.eps * self.g_e * self.g_e / 2.0
    }

    /// `eps^2 g_M^2 / 2`.
    pub fn magnetic_theta(&self) -> f64 {
        self.eps * self.eps * self.g_m * self.g_m / 2.0
    }

    /// Electric phase for a stored link residue.
    pub fn electric_phase(&self, residue: u32) -> f64 {
        match self.coupling {
            CouplingMode::Locked => {
                let l = residue as u64;
                2.0 * PI * ((l * l) % self.k as u64) as f64 / self.k as f64
            }
            CouplingMode::Free => {
                let l = crate::fock::symmetric_rep(residue, self.k) as f64;
                self.electric_alpha() * l * l
            }
        }
    }
}
