//! Ladder, link and plaquette operators written out literally, and dense
//! step layers.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Matrix2;

use super::{Basis, DenseOperator, Expr, Op, OracleError, OracleSpace, C64};
use crate::evolution::{CouplingMode, StepConfig, SubStep};
use crate::gates::{f_matrix, hadamard, mass_rotation, pauli_x};
use crate::lattice::{Axis, Direction, HalfLinkId, Plane, PlaquetteAddress};

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Operators addressable by [`dense_operator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    Annihilator { site: usize, mode: usize },
    Creator { site: usize, mode: usize },
    HalfLinkS(HalfLinkId),
    LinkV(HalfLinkId),
    ElectricE(HalfLinkId),
    LinkU(HalfLinkId),
    /// `c_{x:in,out} = s^dagger_{x:out} s_{x:in}`.
    Corner { site: usize, from: Direction, to: Direction },
    Plaquette(PlaquetteAddress),
    /// `a^dagger_{x,j} a_{x,k}`.
    MassTerm { site: usize, j: usize, k: usize },
    /// `a^dagger_{x+eta,j} V^dagger_{x:eta} a_{x,k}`.
    HoppingTerm { site: usize, axis: Axis, j: usize, k: usize },
}

impl OracleSpace {
    pub fn creator(&self, x: usize, j: usize) -> Expr {
        let p = self.mode_pos(x, j);
        Expr::prod(vec![Expr::Op(Op::Raise01(p)), Expr::Op(Op::ZBefore(p))])
    }

    pub fn annihilator(&self, x: usize, j: usize) -> Expr {
        self.creator(x, j).adjoint()
    }

    pub fn number(&self, x: usize, j: usize) -> Expr {
        Expr::Op(Op::Number(self.mode_pos(x, j)))
    }

    pub fn hole(&self, x: usize, j: usize) -> Expr {
        Expr::Op(Op::Hole(self.mode_pos(x, j)))
    }

    pub fn partner(&self, h: HalfLinkId) -> HalfLinkId {
        HalfLinkId { site: self.lattice().step(h.site, h.dir), dir: h.dir.reversed() }
    }

    /// `s_h = r_h prod_{y < h} Z_y`.
    pub fn s(&self, h: HalfLinkId) -> Expr {
        let p = self.half_pos(h);
        Expr::prod(vec![Expr::Op(Op::Lower(p)), Expr::Op(Op::ZBefore(p))])
    }

    pub fn s_dag(&self, h: HalfLinkId) -> Expr {
        self.s(h).adjoint()
    }

    /// `V_{x:eta} = s_{x:eta} s^dagger_{x+eta:-eta}`.
    pub fn v(&self, h: HalfLinkId) -> Expr {
        Expr::prod(vec![self.s(h), self.s_dag(self.partner(h))])
    }

    pub fn v_dag(&self, h: HalfLinkId) -> Expr {
        self.v(h).adjoint()
    }

    /// `U_{x:eta} = r_{x:eta} r^dagger_{x+eta:-eta}`.
    pub fn u(&self, h: HalfLinkId) -> Expr {
        Expr::prod(vec![Expr::Op(Op::Lower(self.half_pos(h))), Expr::Op(Op::Raise(self.half_pos(self.partner(h))))])
    }

    pub fn electric_op(&self, h: HalfLinkId) -> Expr {
        Expr::Op(Op::Electric(self.half_pos(h)))
    }

    pub fn corner(&self, x: usize, from: Direction, to: Direction) -> Expr {
        Expr::prod(vec![self.s_dag(HalfLinkId { site: x, dir: to }), self.s(HalfLinkId { site: x, dir: from })])
    }

    /// `P = V_{x:eta} V_{x+eta:zeta} V^dagger_{x+zeta:eta} V^dagger_{x:zeta}`.
    pub fn plaquette(&self, p: PlaquetteAddress) -> Expr {
        let lat = self.lattice();
        let (eta, zeta) = (p.plane.first, p.plane.second);
        let x = p.base;
        let xe = lat.shift(x, eta, 1);
        let xz = lat.shift(x, zeta, 1);
        Expr::prod(vec![
            self.v(HalfLinkId { site: x, dir: eta.pos() }),
            self.v(HalfLinkId { site: xe, dir: zeta.pos() }),
            self.v_dag(HalfLinkId { site: xz, dir: eta.pos() }),
            self.v_dag(HalfLinkId { site: x, dir: zeta.pos() }),
        ])
    }

    /// `-c_{x+eta:zeta,-eta} c_{x+eta+zeta:-eta,-zeta} c_{x+zeta:-zeta,eta} c_{x:eta,zeta}`.
    pub fn plaquette_from_corners(&self, p: PlaquetteAddress) -> Expr {
        let lat = self.lattice();
        let (eta, zeta) = (p.plane.first, p.plane.second);
        let x = p.base;
        let xe = lat.shift(x, eta, 1);
        let xz = lat.shift(x, zeta, 1);
        let xez = lat.shift(xe, zeta, 1);
        Expr::prod(vec![
            self.corner(xe, zeta.pos(), eta.neg()),
            self.corner(xez, eta.neg(), zeta.neg()),
            self.corner(xz, zeta.neg(), eta.pos()),
            self.corner(x, eta.pos(), zeta.pos()),
        ])
        .neg()
    }

    pub fn mass_term(&self, x: usize, j: usize, k: usize) -> Expr {
        Expr::prod(vec![self.creator(x, j), self.annihilator(x, k)])
    }

    pub fn hopping_term(&self, x: usize, axis: Axis, j: usize, k: usize) -> Expr {
        let y = self.lattice().shift(x, axis, 1);
        Expr::prod(vec![self.creator(y, j), self.v_dag(HalfLinkId { site: x, dir: axis.pos() }), self.annihilator(x, k)])
    }

    pub fn operator_expr(&self, kind: OperatorKind) -> Expr {
        match kind {
            OperatorKind::Annihilator { site, mode } => self.annihilator(site, mode),
            OperatorKind::Creator { site, mode } => self.creator(site, mode),
            OperatorKind::HalfLinkS(h) => self.s(h),
            OperatorKind::LinkV(h) => self.v(h),
            OperatorKind::ElectricE(h) => self.electric_op(h),
            OperatorKind::LinkU(h) => self.u(h),
            OperatorKind::Corner { site, from, to } => self.corner(site, from, to),
            OperatorKind::Plaquette(p) => self.plaquette(p),
            OperatorKind::MassTerm { site, j, k } => self.mass_term(site, j, k),
            OperatorKind::HoppingTerm { site, axis, j, k } => self.hopping_term(site, axis, j, k),
        }
    }

    /// Many-particle extension of a one-particle block on modes `(j, j+1)`,
    /// written with fermionic operators:
    /// `nbar nbar + det nn + M00 nbar n + M11 n nbar + M10 a+_{j+1} a_j + M01 a+_j a_{j+1}`.
    pub fn two_mode_gate(&self, x: usize, j: usize, m: &Matrix2<C64>) -> Expr {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        let pr = |a: Expr, b: Expr| Expr::prod(vec![a, b]);
        Expr::Sum(vec![
            (one(), pr(self.hole(x, j + 1), self.hole(x, j))),
            (det, pr(self.number(x, j + 1), self.number(x, j))),
            (m[(0, 0)], pr(self.hole(x, j + 1), self.number(x, j))),
            (m[(1, 1)], pr(self.number(x, j + 1), self.hole(x, j))),
            (m[(1, 0)], pr(self.creator(x, j + 1), self.annihilator(x, j))),
            (m[(0, 1)], pr(self.creator(x, j), self.annihilator(x, j + 1))),
        ])
    }

    /// `nbar nbar - n n + a+_{x,j} V_{x:eta} a_{y,k} + a+_{y,k} V+_{x:eta} a_{x,j}`
    /// with `y = x + eta`.
    pub fn transport_expr(&self, x: usize, j: usize, axis: Axis, k: usize) -> Expr {
        let y = self.lattice().shift(x, axis, 1);
        let h = HalfLinkId { site: x, dir: axis.pos() };
        Expr::Sum(vec![
            (one(), Expr::prod(vec![self.hole(x, j), self.hole(y, k)])),
            (-one(), Expr::prod(vec![self.number(x, j), self.number(y, k)])),
            (one(), Expr::prod(vec![self.creator(x, j), self.v(h), self.annihilator(y, k)])),
            (one(), Expr::prod(vec![self.creator(y, k), self.v_dag(h), self.annihilator(x, j)])),
        ])
    }
}

pub fn dense_operator(space: &OracleSpace, basis: &Arc<Basis>, kind: OperatorKind) -> Result<DenseOperator, OracleError> {
    DenseOperator::from_expr(space, basis, &space.operator_expr(kind))
}

fn layer(space: &OracleSpace, f: impl Fn(usize) -> Expr) -> Expr {
    Expr::Prod((0..space.lattice().site_count()).map(f).collect())
}

impl OracleSpace {
    fn s_pair(&self, x: usize, j: usize) -> Expr {
        self.two_mode_gate(x, j, &pauli_x())
    }

    fn onsite_mass(&self, x: usize, cfg: &StepConfig) -> Expr {
        let c = mass_rotation(cfg.eps * cfg.mass);
        if self.lattice().spatial_dim() == 2 {
            self.two_mode_gate(x, 0, &c)
        } else {
            Expr::prod(vec![self.s_pair(x, 1), self.two_mode_gate(x, 0, &c), self.two_mode_gate(x, 2, &c), self.s_pair(x, 1)])
        }
    }

    fn onsite_swap(&self, x: usize) -> Expr {
        if self.lattice().spatial_dim() == 2 {
            self.s_pair(x, 0)
        } else {
            Expr::prod(vec![self.s_pair(x, 1), self.s_pair(x, 0), self.s_pair(x, 2), self.s_pair(x, 1)])
        }
    }

    fn onsite_basis(&self, x: usize, axis: Axis) -> Expr {
        if self.lattice().spatial_dim() == 2 {
            return if axis == Axis::MU { self.two_mode_gate(x, 0, &hadamard()) } else { Expr::Identity };
        }
        let h_kappa = Expr::prod(vec![self.s_pair(x, 1), self.s_pair(x, 2), self.s_pair(x, 1)]);
        match axis {
            Axis::MU => Expr::prod(vec![h_kappa, self.two_mode_gate(x, 0, &hadamard()), self.two_mode_gate(x, 2, &hadamard())]),
            Axis::NU => Expr::prod(vec![h_kappa, self.two_mode_gate(x, 0, &f_matrix()), self.two_mode_gate(x, 2, &f_matrix())]),
            _ => h_kappa,
        }
    }

    fn link_transport(&self, x: usize, axis: Axis) -> Expr {
        if self.lattice().spatial_dim() == 2 {
            return self.transport_expr(x, 1, axis, 0);
        }
        let y = self.lattice().shift(x, axis, 1);
        let t = self.transport_expr(x, 3, axis, 0);
        Expr::prod(vec![t.clone(), self.s_pair(y, 0), self.s_pair(x, 2), t])
    }

    /// Per-direction block. 2+1: `H (T S) H^dagger` for mu, `T S` for nu.
    /// 3+1: `H^dagger (T S) H`.
    fn direction_block(&self, axis: Axis) -> Expr {
        let t = layer(self, |x| self.link_transport(x, axis));
        let s = layer(self, |x| self.onsite_swap(x));
        let h = layer(self, |x| self.onsite_basis(x, axis));
        let hd = h.adjoint();
        if self.lattice().spatial_dim() == 2 {
            Expr::prod(vec![h, t, s, hd])
        } else {
            Expr::prod(vec![hd, t, s, h])
        }
    }

    pub fn step_expr(&self, sub: SubStep, cfg: &StepConfig) -> Result<Expr, OracleError> {
        let lat = self.lattice();
        Ok(match sub {
            SubStep::Mass => layer(self, |x| self.onsite_mass(x, cfg)),
            SubStep::Swap => layer(self, |x| self.onsite_swap(x)),
            SubStep::BasisChange(a) => layer(self, |x| self.onsite_basis(x, a)),
            SubStep::BasisChangeAdjoint(a) => layer(self, |x| self.onsite_basis(x, a)).adjoint(),
            SubStep::Transport(a) => layer(self, |x| self.link_transport(x, a)),
            SubStep::Fermionic => {
                // C [nu][mu] in 2+1, C [mu][nu][kappa] in 3+1.
                let mut blocks: Vec<Expr> = lat.axes().map(|a| self.direction_block(a)).collect();
                if lat.spatial_dim() == 2 {
                    blocks.reverse();
                }
                let mut f = vec![self.step_expr(SubStep::Mass, cfg)?];
                f.extend(blocks);
                Expr::Prod(f)
            }
            SubStep::Electric => {
                let alpha = match cfg.coupling {
                    CouplingMode::Locked => 2.0 * PI / cfg.k as f64,
                    CouplingMode::Free => cfg.electric_alpha(),
                };
                Expr::Prod(
                    lat.links()
                        .map(|l| Expr::Op(Op::ElectricPhase(self.half_pos(HalfLinkId { site: l.site, dir: l.axis.pos() }), alpha)))
                        .collect(),
                )
            }
            _ => return Err(OracleError::Invalid(format!("{sub:?} has no closed-form expression; use dense_step"))),
        })
    }

    /// `sum_p (P + P^dagger)` over the plaquettes of the given planes.
    pub fn plaquette_sum(&self, planes: &[Plane]) -> Expr {
        let terms = self
            .lattice()
            .plaquettes()
            .into_iter()
            .filter(|p| planes.contains(&p.plane))
            .flat_map(|p| {
                let e = self.plaquette(p);
                [(one(), e.adjoint()), (one(), e)]
            })
            .collect();
        Expr::Sum(terms)
    }
}

pub fn dense_step(space: &OracleSpace, basis: &Arc<Basis>, sub: SubStep, cfg: &StepConfig) -> Result<DenseOperator, OracleError> {
    let lat = space.lattice();
    match sub {
        SubStep::Magnetic(plane) => {
            let h = DenseOperator::from_expr(space, basis, &space.plaquette_sum(&[plane]))?;
            h.expm_i(cfg.magnetic_theta())
        }
        SubStep::MagneticAll => {
            let h = DenseOperator::from_expr(space, basis, &space.plaquette_sum(&lat.planes()))?;
            h.expm_i(cfg.magnetic_theta())
        }
        SubStep::Full => {
            let fe = DenseOperator::from_expr(
                space,
                basis,
                &Expr::prod(vec![space.step_expr(SubStep::Electric, cfg)?, space.step_expr(SubStep::Fermionic, cfg)?]),
            )?;
            dense_step(space, basis, SubStep::MagneticAll, cfg)?.mul(&fe)
        }
        _ => DenseOperator::from_expr(space, basis, &space.step_expr(sub, cfg)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianPart {
    Electric,
    Magnetic,
}

/// Kogut-Susskind pieces with `Delta x = eps`:
/// `H_E = g_E^2/2 eps sum E^2`, `H_M = g_M^2/2 eps sum (P + P^dagger)`.
pub fn ks_hamiltonian(
    space: &OracleSpace,
    basis: &Arc<Basis>,
    part: HamiltonianPart,
    cfg: &StepConfig,
) -> Result<DenseOperator, OracleError> {
    let lat = space.lattice();
    let e = match part {
        HamiltonianPart::Electric => Expr::Sum(
            lat.links()
                .map(|l| {
                    let e = space.electric_op(HalfLinkId { site: l.site, dir: l.axis.pos() });
                    (C64::new(cfg.g_e * cfg.g_e / 2.0 * cfg.eps, 0.0), Expr::prod(vec![e.clone(), e]))
                })
                .collect(),
        ),
        HamiltonianPart::Magnetic => space.plaquette_sum(&lat.planes()).scaled(C64::new(cfg.g_m * cfg.g_m / 2.0 * cfg.eps, 0.0)),
    };
    DenseOperator::from_expr(space, basis, &e)
}
