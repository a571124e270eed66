//! Dehn twists as exact strand surgery.
//!
//! The twisting curve is routed embedded and pushed off the diagram. Every
//! transversal pass of a strand through the pushed-off curve is cut and
//! rerouted once around a parallel lane of the curve; lanes are nested inside
//! a corridor sized below the smallest feature gap, so the only new crossings
//! are the k(k-1) mutual ones between rerouted stretches, and each rerouted
//! stretch passes over everything rerouted at a smaller lane.

use std::collections::HashMap;

use crate::coeffs::Rational;
use crate::surface::CyclicWord;

use super::ops::{
    arc_to_path, cycle_to_path, explode_arc, explode_cycle, linearize_cycle, npos,
    on_open_segment, over_rule_from_map, seg_end_nodes_closed, seg_end_nodes_open,
    split_at_point, SNode,
};
use super::{offset_comp, route, CompPath, Diagram, Dir, Pt};

/// Apply the `power`-th Dehn twist along `class` to `d`. The class must be
/// drawable embedded by the standard router. Strands of `d` keep their
/// blackboard framing: a full twist adds no self-crossings to any strand.
pub fn geometric_twist(d: &Diagram, class: &CyclicWord, power: i64) -> Result<Diagram, String> {
    if power == 0 || class.is_empty() {
        return Ok(d.clone());
    }
    let mut cur = d.clone();
    for _ in 0..power.unsigned_abs() {
        cur = single_twist(&cur, class, power > 0)?;
    }
    Ok(cur)
}

struct Site {
    p: Pt,
    comp: usize,
    end_node: usize,
    t: Rational,
    u: Dir,
    g: Dir,
    n: Dir,
    tau: i64,
    locv: bool,
    o: Rational,
}

fn shifted(p: &Pt, d: Dir, by: &Rational) -> Pt {
    let (dx, dy) = d.unit();
    Pt::new(
        p.x.add_ref(&(Rational::from_int(dx) * by.clone())),
        p.y.add_ref(&(Rational::from_int(dy) * by.clone())),
    )
}

fn single_twist(d: &Diagram, class: &CyclicWord, positive: bool) -> Result<Diagram, String> {
    let gamma = route::embedded_route(&d.surface, class)?;
    let eps = d.fresh_eps(&gamma);
    let gpath = offset_comp(&gamma.comps[0], &eps);

    // Overlay the pushed-off curve to find the transversal passes. Crossings
    // among the diagram's own components keep their stored sense; the curve's
    // provisional sense is irrelevant, only the points matter.
    let nd = d.comps.len();
    let old = d.crossings.clone();
    let mut union_comps = d.comps.clone();
    union_comps.push(gpath.clone());
    let rule = move |_: &Pt, v: &super::PassLoc, h: &super::PassLoc| -> bool {
        if v.seg.comp < nd && h.seg.comp < nd {
            for c in &old {
                if c.over == v.seg && c.under == h.seg {
                    return true;
                }
                if c.over == h.seg && c.under == v.seg {
                    return false;
                }
            }
            unreachable!("overlay created a diagram-diagram crossing with no precedent");
        }
        true
    };
    let u = Diagram::assemble(d.surface.clone(), union_comps, &rule);

    let gsegs = gpath.segments();
    let mut sites: Vec<Site> = Vec::new();
    for c in &u.crossings {
        let (dref, gref) = if c.over.comp == nd && c.under.comp == nd {
            return Err("twisting curve fails to stay embedded after pushoff".into());
        } else if c.over.comp == nd {
            (c.under, c.over)
        } else if c.under.comp == nd {
            (c.over, c.under)
        } else {
            continue;
        };
        let dseg = u.seg(dref);
        let udir = dseg.dir();
        let g = gsegs[gref.seg].dir();
        assert_ne!(udir.vertical(), g.vertical(), "twist sites are transversal");
        let n = g.left();
        let (ux, uy) = udir.unit();
        let t = c.at.x.sub_ref(&dseg.a.x) * Rational::from_int(ux)
            + c.at.y.sub_ref(&dseg.a.y) * Rational::from_int(uy);
        let end_node = if d.comps[dref.comp].open {
            seg_end_nodes_open(&d.comps[dref.comp])[dref.seg]
        } else {
            seg_end_nodes_closed(&d.comps[dref.comp])[dref.seg]
        };
        sites.push(Site {
            p: c.at.clone(),
            comp: dref.comp,
            end_node,
            t,
            u: udir,
            g,
            n,
            tau: if udir == n { 1 } else { -1 },
            locv: g.vertical(),
            o: Rational::zero(),
        });
    }
    if sites.is_empty() {
        return Ok(d.clone());
    }

    let k = sites.len();
    let w = u.min_gap() * Rational::from_pair(1, 4);
    for (i, s) in sites.iter_mut().enumerate() {
        s.o = w.clone() * Rational::from_pair(i as i64 + 1, k as i64 + 2);
    }
    let eta: i64 = if positive { -1 } else { 1 };

    // Each rerouted stretch runs to its long lane on the right of the curve,
    // carries the full turn there, and switches sides one lane-width short of
    // its entry point.
    let mut comps = d.comps.clone();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        (sites[b].comp, sites[b].end_node, &sites[b].t).cmp(&(
            sites[a].comp,
            sites[a].end_node,
            &sites[a].t,
        ))
    });
    for &i in &order {
        let s = &sites[i];
        let lane = offset_comp(&gpath, &s.o.neg_ref());
        let tang = if eta == 1 { s.o.neg_ref() } else { s.o.clone() };
        let a = shifted(&s.p, s.u, &s.o.neg_ref());
        let c_pt = shifted(&s.p, s.u, &s.o);
        let foot = shifted(&s.p, s.g, &tang);
        let b = shifted(&foot, s.n, &s.o.neg_ref());
        let bp = shifted(&foot, s.n, &s.o);
        let fwd = s.tau == eta;
        let insert: Vec<SNode> = if s.tau == 1 {
            let mut v = lane_run(&lane, &a, &b, fwd)?;
            v.push(SNode::P(bp));
            v.push(SNode::P(c_pt));
            v
        } else {
            let mut v = vec![SNode::P(a), SNode::P(bp)];
            v.extend(lane_run(&lane, &b, &c_pt, fwd)?);
            v
        };
        let host = &mut comps[s.comp];
        if host.open {
            let mut nodes = explode_arc(host);
            nodes.splice(s.end_node..s.end_node, insert);
            *host = arc_to_path(&nodes);
        } else {
            let mut nodes = explode_cycle(host);
            nodes.splice(s.end_node..s.end_node, insert);
            *host = cycle_to_path(&nodes);
        }
    }

    // All new crossings are predictable: for lanes o_i > o_j, the long run of
    // site i crosses the remnant strand of site j beside its cut, and the
    // side switch of site i crosses the long run of site j. The deeper lane
    // passes over both times.
    let mut omap: HashMap<Pt, bool> = d.over_map();
    for i in 0..k {
        for j in 0..k {
            if sites[i].o <= sites[j].o || i == j {
                continue;
            }
            let q1 = shifted(&sites[j].p, sites[j].n, &sites[i].o.neg_ref());
            omap.insert(q1, sites[j].locv);
            let tang = if eta == 1 { sites[i].o.neg_ref() } else { sites[i].o.clone() };
            let q2 = shifted(
                &shifted(&sites[i].p, sites[i].g, &tang),
                sites[i].n,
                &sites[j].o.neg_ref(),
            );
            omap.insert(q2, !sites[i].locv);
        }
    }

    let out = Diagram::assemble(d.surface.clone(), comps, &over_rule_from_map(omap));
    assert_eq!(
        out.crossings.len(),
        d.crossings.len() + k * (k - 1),
        "twist inserted an unexpected crossing pattern"
    );
    assert_eq!(out.writhe(), d.writhe(), "rerouted stretches cancel in pairs");
    Ok(out)
}

/// Sub-path of the lane from one interior point to another, traversed with or
/// against the lane's own orientation. Both points must lie strictly inside
/// lane segments; the result carries `P` sentinels on both ends.
fn lane_run(lane: &CompPath, from: &Pt, to: &Pt, forward: bool) -> Result<Vec<SNode>, String> {
    let mut cycle = explode_cycle(lane);
    if !forward {
        cycle = rev_cycle(&cycle);
    }
    let m = cycle.len();
    let mut end_node = None;
    for kk in 0..m {
        if let SNode::P(q) = &cycle[kk] {
            let prev = npos(&cycle[(kk + m - 1) % m]);
            if on_open_segment(prev, q, from) {
                end_node = Some(kk);
                break;
            }
        }
    }
    let e = end_node.ok_or("twist lane does not pass its anchor point")?;
    let linear = linearize_cycle(&cycle, e, from);
    let (pre, _) =
        split_at_point(&linear, to).ok_or("twist lane does not pass its landing point")?;
    Ok(pre)
}

/// Reverse a cycle of nodes: jump letters invert, jump targets move to the
/// other end of their step.
fn rev_cycle(cycle: &[SNode]) -> Vec<SNode> {
    let m = cycle.len();
    let mut out = Vec::with_capacity(m);
    for kk in (0..m).rev() {
        let prev = npos(&cycle[(kk + m - 1) % m]).clone();
        out.push(match &cycle[kk] {
            SNode::P(_) => SNode::P(prev),
            SNode::G { letter, .. } => SNode::G { letter: letter.inverse(), to: prev },
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::route::{draw_one, standard_arc};
    use super::*;
    use crate::surface::{cyclic_reduce, SurfacePresentation};
    use std::sync::Arc;

    fn annulus() -> Arc<SurfacePresentation> {
        SurfacePresentation::annulus()
    }

    fn core(s: &Arc<SurfacePresentation>) -> CyclicWord {
        cyclic_reduce(&s.parse_word("r1"))
    }

    #[test]
    fn twist_moves_arc_winding() {
        let s = annulus();
        let c = core(&s);
        let d = standard_arc(&s, 0);

        let up = geometric_twist(&d, &c, 1).unwrap();
        assert!(up.crossings.is_empty());
        assert_eq!(up.extract_code().arc_word(0), s.parse_word("r1"));

        let down = geometric_twist(&d, &c, -1).unwrap();
        assert!(down.crossings.is_empty());
        assert_eq!(down.extract_code().arc_word(0), s.parse_word("r1^-1"));

        // the second round's pushoff runs strictly outside the first lane, so
        // each pass stays a single site and the result is still embedded
        let twice = geometric_twist(&d, &c, 2).unwrap();
        assert!(twice.crossings.is_empty());
        assert_eq!(twice.extract_code().arc_word(0), s.parse_word("r1 r1"));
    }

    #[test]
    fn twist_disjoint_and_power_zero() {
        let s = annulus();
        let c = core(&s);
        let d = draw_one(&s, &c, 1);
        // the curve drawn beside itself never meets the corridor
        let out = geometric_twist(&d, &c, 1).unwrap();
        assert_eq!(out.to_json(), d.to_json());
        let arc = standard_arc(&s, 0);
        assert_eq!(geometric_twist(&arc, &c, 0).unwrap().to_json(), arc.to_json());
    }

    #[test]
    fn twist_preserves_class_of_closed_curves() {
        let s = annulus();
        let c = core(&s);
        let rr = cyclic_reduce(&s.parse_word("r1 r1"));
        let d = draw_one(&s, &rr, 1);
        let before = d.crossings.len();
        let out = geometric_twist(&d, &c, 1).unwrap();
        // the doubled curve meets the corridor twice with cancelling senses
        assert_eq!(out.crossings.len(), before + 2);
        assert_eq!(out.writhe(), d.writhe());
        assert_eq!(out.extract_code().comp_class(0), rr);
    }

    #[test]
    fn twist_roundtrip_restores_arc_class() {
        let s = annulus();
        let c = core(&s);
        let d = standard_arc(&s, 0);
        let there = geometric_twist(&d, &c, 1).unwrap();
        let back = geometric_twist(&there, &c, -1).unwrap();
        let code = back.extract_code();
        assert!(code.arc_word(0).0.is_empty());
        assert_eq!(back.writhe(), 0);
    }
}
