use num_complex::Complex64;

use crate::fock::{dof_parity, BasisConfig};
use crate::lattice::{Direction, DofId, HalfLinkId, Lattice, LinkId, PlaquetteAddress};

/// One plaquette seen as a shift register.
///
/// On the orbit `(L1 - t, L2 - t, L3 + t, L4 + t)` the plaquette operator acts
/// as `sigma * (t -> t + 1)`, where the register `n` is the stored value of
/// `L4 = x:zeta` and `sigma = -(-1)^{phi_o}` is fixed by the parities of the
/// spectator half-links inside the four corner Z-strings.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaquetteBlock {
    pub address: PlaquetteAddress,
    /// `(x:eta, x+eta:zeta, x+zeta:eta, x:zeta)`.
    pub links: [LinkId; 4],
    pub n_link: LinkId,
    pub spectators: Vec<HalfLinkId>,
}

const DELTAS: [i64; 4] = [-1, -1, 1, 1];

impl PlaquetteBlock {
    pub fn new(lat: &Lattice, address: PlaquetteAddress) -> PlaquetteBlock {
        let [x, xe, xez, xz] = address.sites(lat);
        let (eta, zeta) = (address.plane.first, address.plane.second);
        let corners: [(usize, Direction, Direction); 4] = [
            (x, eta.pos(), zeta.pos()),
            (xz, zeta.neg(), eta.pos()),
            (xez, eta.neg(), zeta.neg()),
            (xe, zeta.pos(), eta.neg()),
        ];
        let mut spectators = Vec::new();
        for (site, a, b) in corners {
            let pa = lat.jw_position(DofId::half(site, a));
            let pb = lat.jw_position(DofId::half(site, b));
            for p in pa.min(pb)..pa.max(pb) {
                if let DofId::HalfLink(h) = lat.dof_at(p) {
                    if h.dir != a && h.dir != b {
                        spectators.push(h);
                    }
                }
            }
        }
        let links = address.links(lat);
        PlaquetteBlock { address, links, n_link: links[3], spectators }
    }

    pub fn n(&self, lat: &Lattice, cfg: &BasisConfig) -> u32 {
        cfg.link_value(lat, self.n_link)
    }

    /// `sigma` with `P |t> = sigma |t+1>` on this configuration's orbit.
    pub fn sign(&self, lat: &Lattice, cfg: &BasisConfig) -> f64 {
        let odd = self.spectators.iter().filter(|&&h| dof_parity(lat, cfg, DofId::HalfLink(h))).count() % 2 == 1;
        if odd {
            1.0
        } else {
            -1.0
        }
    }

    /// The configuration `t` steps along the orbit.
    pub fn shifted(&self, lat: &Lattice, cfg: &BasisConfig, t: i64) -> BasisConfig {
        let mut out = cfg.clone();
        for (l, d) in self.links.iter().zip(DELTAS) {
            out.shift_link(lat, *l, d * t);
        }
        out
    }

    /// `P |cfg>`.
    pub fn apply_p(&self, lat: &Lattice, cfg: &BasisConfig, amp: Complex64) -> (BasisConfig, Complex64) {
        (self.shifted(lat, cfg, 1), amp * self.sign(lat, cfg))
    }
}
