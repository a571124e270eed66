//! Flattening a one-boundary surface into the disk.
//!
//! The disk-with-bands is drawn in the plane with each handle clasped in the
//! standard genus-g Heegaard position: the body shrinks into the lower part
//! of the disk, every band traversal becomes a rectangular arch above it, and
//! the a-arches of a handle cross the b-arches of the same handle exactly
//! once each (the gate interleaving a⁻ b⁻ a⁺ b⁺ forces this). Arches of one
//! band nest without meeting because lanes reverse order through a band.
//! The single over/under choice at the clasps is fixed once, here.

use std::collections::HashMap;

use crate::coeffs::Rational;
use crate::surface::SurfacePresentation;

use super::ops::{cycle_to_path, explode_cycle, npos, over_rule_from_map, SNode};
use super::{layout, Diagram, Pt};

/// At a handle clasp the a-band arch passes over the b-band arch. Any fixed
/// choice yields the same invariants; this one is the pinned convention.
pub const CLASP_A_OVER_B: bool = true;

struct Arch {
    comp: usize,
    node: usize,
    handle: usize,
    is_a: bool,
    /// Mapped x of the two feet, left and right. The right foot of an
    /// a-arch sits in the a⁺ gate, between the b-gates of its handle.
    xl: Rational,
    xr: Rational,
    level: Rational,
}

/// Redraw a closed diagram on Σ_{g,1} inside the disk through the standard
/// planar embedding. Body crossings keep their over/under; each (a,b) arch
/// pair of a handle adds one clasp crossing.
pub fn embed_disk(d: &Diagram) -> Diagram {
    assert_eq!(d.surface.boundaries, 1, "embedding needs a one-boundary surface");
    for c in &d.comps {
        assert!(!c.open, "embedding is defined for closed diagrams");
    }
    if d.surface.genus == 0 {
        return d.clone();
    }
    let lay = layout(&d.surface);
    let xscale = Rational::from_int(48) * lay.width.recip();
    let yscale = Rational::from_pair(4, 5);
    let fx = |x: &Rational| Rational::one() + x * &xscale;
    let fy = |y: &Rational| y * &yscale;
    let fp = |p: &Pt| Pt::new(fx(&p.x), fy(&p.y));

    // collect one arch per gate jump
    let mut arches: Vec<Arch> = Vec::new();
    let exploded: Vec<Vec<SNode>> = d.comps.iter().map(explode_cycle).collect();
    for (ci, nodes) in exploded.iter().enumerate() {
        let m = nodes.len();
        for (j, n) in nodes.iter().enumerate() {
            if let SNode::G { letter, to } = n {
                let from = npos(&nodes[(j + m - 1) % m]);
                let (x1, x2) = (fx(&from.x), fx(&to.x));
                let (xl, xr) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
                arches.push(Arch {
                    comp: ci,
                    node: j,
                    handle: (letter.band / 2) as usize,
                    is_a: letter.band % 2 == 0,
                    xl,
                    xr,
                    level: Rational::zero(),
                });
            }
        }
    }
    // levels: all a-arches above all b-arches, outer arches above inner,
    // spread through (80, 100)
    arches.sort_by(|p, q| {
        (!p.is_a, &p.xl).cmp(&(!q.is_a, &q.xl))
    });
    let total = arches.len() as i64;
    for (i, a) in arches.iter_mut().enumerate() {
        a.level =
            Rational::from_int(100) - Rational::from_pair(20 * (i as i64 + 1), total + 2);
    }

    // over/under is decided up front: body crossings inherit, clasps are
    // the a-foot (vertical) against the b-run (horizontal)
    let mut omap: HashMap<Pt, bool> = HashMap::new();
    for (p, v) in d.over_map() {
        omap.insert(fp(&p), v);
    }
    let mut clasps = 0usize;
    for a in arches.iter().filter(|a| a.is_a) {
        for b in arches.iter().filter(|b| !b.is_a && b.handle == a.handle) {
            omap.insert(Pt::new(a.xr.clone(), b.level.clone()), CLASP_A_OVER_B);
            clasps += 1;
        }
    }

    let level_of: HashMap<(usize, usize), Rational> =
        arches.iter().map(|a| ((a.comp, a.node), a.level.clone())).collect();
    let comps = exploded
        .iter()
        .enumerate()
        .map(|(ci, nodes)| {
            let m = nodes.len();
            let mut out = Vec::with_capacity(m + 2 * arches.len());
            for (j, n) in nodes.iter().enumerate() {
                match n {
                    SNode::P(p) => out.push(SNode::P(fp(p))),
                    SNode::G { to, .. } => {
                        let from = npos(&nodes[(j + m - 1) % m]);
                        let level = &level_of[&(ci, j)];
                        out.push(SNode::P(Pt::new(fx(&from.x), level.clone())));
                        out.push(SNode::P(Pt::new(fx(&to.x), level.clone())));
                        out.push(SNode::P(fp(to)));
                    }
                }
            }
            cycle_to_path(&out)
        })
        .collect();
    let out = Diagram::assemble(SurfacePresentation::disk(), comps, &over_rule_from_map(omap));
    assert_eq!(
        out.crossings.len(),
        d.crossings.len() + clasps,
        "embedding must add exactly one crossing per same-handle arch pair"
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::route::embedded_route;
    use crate::surface::cyclic_reduce;

    #[test]
    fn handle_curves_embed_as_unknots() {
        let s = SurfacePresentation::one_boundary(1);
        for word in ["a1", "b1"] {
            let class = cyclic_reduce(&s.parse_word(word));
            let d = embedded_route(&s, &class).unwrap();
            let e = embed_disk(&d);
            assert_eq!(e.crossings.len(), 0);
            let (clean, kinks, circles) = e.extract_code().cleanup();
            assert!(clean.comps.is_empty());
            assert_eq!((kinks, circles), (0, 1));
        }
    }

    #[test]
    fn diagonal_curve_picks_up_one_clasp_kink() {
        let s = SurfacePresentation::one_boundary(1);
        let class = cyclic_reduce(&s.parse_word("a1 b1"));
        let d = embedded_route(&s, &class).unwrap();
        let e = embed_disk(&d);
        assert_eq!(e.crossings.len(), d.crossings.len() + 1);
        assert_eq!(e.writhe(), d.writhe() + 1);
        let (clean, kinks, circles) = e.extract_code().cleanup();
        assert!(clean.comps.is_empty());
        assert_eq!((kinks, circles), (1, 1));
    }

    #[test]
    fn dual_curves_embed_as_a_clasp_or_unlink() {
        let s = SurfacePresentation::one_boundary(1);
        let da = embedded_route(&s, &cyclic_reduce(&s.parse_word("a1"))).unwrap();
        let db = embedded_route(&s, &cyclic_reduce(&s.parse_word("b1"))).unwrap();
        let d = crate::diagrams::ops::stack(&da, &db).unwrap();
        assert_eq!(d.crossings.len(), 1, "dual curves meet once on the surface");
        let e = embed_disk(&d);
        assert_eq!(e.crossings.len(), 2);
        assert_eq!(e.writhe(), d.writhe() + 1);
        let (clean, _, circles) = e.extract_code().cleanup();
        if d.crossings[0].sign < 0 {
            // the clasp cancels the surface crossing
            assert!(clean.comps.is_empty());
            assert_eq!(circles, 2);
        } else {
            // a true clasp: two same-sign crossings survive
            assert_eq!(clean.cross_total(), 2);
        }
    }

    #[test]
    fn handles_do_not_interact() {
        let s = SurfacePresentation::one_boundary(2);
        let class = cyclic_reduce(&s.parse_word("a1 b2"));
        let d = embedded_route(&s, &class).unwrap();
        let e = embed_disk(&d);
        assert_eq!(e.crossings.len(), d.crossings.len());
        let (clean, kinks, circles) = e.extract_code().cleanup();
        assert!(clean.comps.is_empty());
        assert_eq!((kinks, circles), (0, 1));
    }

    #[test]
    fn parallel_copies_nest() {
        let s = SurfacePresentation::one_boundary(1);
        let class = cyclic_reduce(&s.parse_word("a1 b1"));
        let d = crate::diagrams::route::draw_one(&s, &class, 2);
        let e = embed_disk(&d);
        // two a-arches against two b-arches: four clasps
        assert_eq!(e.crossings.len(), d.crossings.len() + 4);
    }

    #[test]
    fn disk_diagrams_pass_through() {
        let s = SurfacePresentation::disk();
        let d = Diagram::empty(s);
        let e = embed_disk(&d);
        assert!(e.comps.is_empty() && e.crossings.is_empty());
    }
}
