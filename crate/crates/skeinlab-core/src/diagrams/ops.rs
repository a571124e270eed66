//! Diagram surgery: stacking, standard drawing of monomials, and Conway
//! resolution. Strand rerouting works on exploded node lists; crossings are
//! recomputed afterwards and over/under is inherited by crossing point,
//! which surgeries keep fixed.

use std::collections::HashMap;
use std::sync::Arc;

use crate::coeffs::Rational;
use crate::surface::{CyclicWord, Letter, SurfacePresentation};

use super::route;
use super::{CompPath, Diagram, Dir, Pt, SegRef, Step};

#[derive(Clone, Debug)]
pub(crate) enum SNode {
    P(Pt),
    G { letter: Letter, to: Pt },
}

pub(crate) fn npos(n: &SNode) -> &Pt {
    match n {
        SNode::P(p) => p,
        SNode::G { to, .. } => to,
    }
}

/// Closed component as a cycle: node k is the endpoint of step k, the start
/// point is the last node's position.
pub(crate) fn explode_cycle(c: &CompPath) -> Vec<SNode> {
    assert!(!c.open);
    c.steps
        .iter()
        .map(|s| match s {
            Step::Line(p) => SNode::P(p.clone()),
            Step::Jump { letter, to } => SNode::G { letter: *letter, to: to.clone() },
        })
        .collect()
}

pub(crate) fn cycle_to_path(cycle: &[SNode]) -> CompPath {
    let start = npos(cycle.last().expect("nonempty cycle")).clone();
    let steps = cycle
        .iter()
        .map(|n| match n {
            SNode::P(p) => Step::Line(p.clone()),
            SNode::G { letter, to } => Step::Jump { letter: *letter, to: to.clone() },
        })
        .collect();
    super::normalize_path(&CompPath { start, steps, open: false })
}

/// Open component: node 0 is the start point.
pub(crate) fn explode_arc(c: &CompPath) -> Vec<SNode> {
    assert!(c.open);
    let mut v = vec![SNode::P(c.start.clone())];
    for s in &c.steps {
        v.push(match s {
            Step::Line(p) => SNode::P(p.clone()),
            Step::Jump { letter, to } => SNode::G { letter: *letter, to: to.clone() },
        });
    }
    v
}

pub(crate) fn arc_to_path(nodes: &[SNode]) -> CompPath {
    let start = match &nodes[0] {
        SNode::P(p) => p.clone(),
        _ => panic!("arc must start at a point"),
    };
    let steps = nodes[1..]
        .iter()
        .map(|n| match n {
            SNode::P(p) => Step::Line(p.clone()),
            SNode::G { letter, to } => Step::Jump { letter: *letter, to: to.clone() },
        })
        .collect();
    super::normalize_path(&CompPath { start, steps, open: true })
}

pub(crate) fn on_open_segment(a: &Pt, b: &Pt, p: &Pt) -> bool {
    if a.x == b.x {
        p.x == a.x
            && ((a.y < p.y && p.y < b.y) || (b.y < p.y && p.y < a.y))
    } else {
        p.y == a.y
            && ((a.x < p.x && p.x < b.x) || (b.x < p.x && p.x < a.x))
    }
}

/// Open the cycle at a point strictly inside the segment ending at node
/// `end_node`: returns a linear list running from the cut back around to it,
/// with explicit `P(at)` sentinels on both ends.
pub(crate) fn linearize_cycle(cycle: &[SNode], end_node: usize, at: &Pt) -> Vec<SNode> {
    let m = cycle.len();
    let mut out = Vec::with_capacity(m + 2);
    out.push(SNode::P(at.clone()));
    for k in 0..m {
        out.push(cycle[(end_node + k) % m].clone());
    }
    out.push(SNode::P(at.clone()));
    out
}

/// Find the unique list segment containing `p` strictly inside; split the
/// list there into `[.. P(p)]` and `[P(p) ..]`.
pub(crate) fn split_at_point(list: &[SNode], p: &Pt) -> Option<(Vec<SNode>, Vec<SNode>)> {
    let mut cur = npos(&list[0]).clone();
    for (k, n) in list.iter().enumerate().skip(1) {
        match n {
            SNode::P(q) => {
                if on_open_segment(&cur, q, p) {
                    let mut pre: Vec<SNode> = list[..k].to_vec();
                    pre.push(SNode::P(p.clone()));
                    let mut post = vec![SNode::P(p.clone())];
                    post.extend_from_slice(&list[k..]);
                    return Some((pre, post));
                }
                cur = q.clone();
            }
            SNode::G { to, .. } => cur = to.clone(),
        }
    }
    None
}

/// Node index (cycle convention) of the node ending each geometric segment.
pub(crate) fn seg_end_nodes_closed(c: &CompPath) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, s) in c.steps.iter().enumerate() {
        if matches!(s, Step::Line(_)) {
            out.push(k);
        }
    }
    out
}

/// Same for an arc with its leading start node.
pub(crate) fn seg_end_nodes_open(c: &CompPath) -> Vec<usize> {
    let mut out = Vec::new();
    for (k, s) in c.steps.iter().enumerate() {
        if matches!(s, Step::Line(_)) {
            out.push(k + 1);
        }
    }
    out
}

fn same_surface(d1: &Diagram, d2: &Diagram) -> bool {
    d1.surface.genus == d2.surface.genus && d1.surface.boundaries == d2.surface.boundaries
}

/// Stack `d1` over `d2` (all crossings between them have `d1` on top). If
/// coordinates collide, the closed diagram is pushed off first.
pub fn stack(d1: &Diagram, d2: &Diagram) -> Result<Diagram, String> {
    if !same_surface(d1, d2) {
        return Err("cannot stack diagrams on different surfaces".into());
    }
    if d1.comps.is_empty() {
        return Ok(d2.clone());
    }
    if d2.comps.is_empty() {
        return Ok(d1.clone());
    }
    let arc1 = d1.comps.iter().any(|c| c.open);
    let arc2 = d2.comps.iter().any(|c| c.open);
    let (a, b) = if !d1.shares_coordinates(d2) {
        (d1.clone(), d2.clone())
    } else if !arc2 {
        let eps = d1.fresh_eps(d2);
        (d1.clone(), d2.pushed_off(&eps))
    } else if !arc1 {
        let eps = d2.fresh_eps(d1);
        (d1.pushed_off(&eps), d2.clone())
    } else {
        return Err("cannot stack two arc diagrams".into());
    };
    let n1 = a.comps.len();
    let mut omap = a.over_map();
    omap.extend(b.over_map());
    let mut comps = a.comps.clone();
    comps.extend(b.comps.iter().cloned());
    let rule = move |at: &Pt, v: &super::PassLoc, _h: &super::PassLoc| -> bool {
        match omap.get(at) {
            Some(&vo) => vo,
            None => v.seg.comp < n1,
        }
    };
    let out = Diagram::assemble(d1.surface.clone(), comps, &rule);
    debug_assert!(out.crossings.len() >= a.crossings.len() + b.crossings.len());
    Ok(out)
}

/// Standard diagram of an ordered monomial: each entry drawn by the router
/// (multiplicity as the cyclically closed cable) and stacked earlier-higher.
pub fn draw(
    surface: &Arc<SurfacePresentation>,
    items: &[(CyclicWord, usize)],
) -> Result<Diagram, String> {
    let mut acc = Diagram::empty(surface.clone());
    for (cls, mult) in items {
        if *mult == 0 {
            continue;
        }
        let one = route::draw_one(surface, cls, *mult);
        acc = stack(&acc, &one)?;
    }
    Ok(acc)
}

struct CrossFrame {
    p: Pt,
    /// vertical strand: y-direction sign, its segment ref
    su: i64,
    v: SegRef,
    /// horizontal strand: x-direction sign
    so: i64,
    h: SegRef,
    e: Rational,
    ep: Rational,
}

pub(crate) fn axis_gap(values: &std::collections::BTreeSet<Rational>, v: &Rational) -> Rational {
    let mut best: Option<Rational> = None;
    for w in values {
        if w == v {
            continue;
        }
        let d = if w > v { w.sub_ref(v) } else { v.sub_ref(w) };
        if best.as_ref().is_none_or(|b| &d < b) {
            best = Some(d);
        }
    }
    best.expect("diagram with a single coordinate value")
}

fn frame(d: &Diagram, cid: usize) -> CrossFrame {
    let c = &d.crossings[cid];
    let (vref, href) = if d.seg(c.over).dir().vertical() {
        (c.over, c.under)
    } else {
        (c.under, c.over)
    };
    let vs = d.seg(vref);
    let hs = d.seg(href);
    let su = if vs.dir() == Dir::N { 1 } else { -1 };
    let so = if hs.dir() == Dir::E { 1 } else { -1 };
    let (xs, ys) = d.coordinate_values();
    let e = axis_gap(&ys, &c.at.y) * Rational::from_pair(1, 2);
    let ep = axis_gap(&xs, &c.at.x) * Rational::from_pair(1, 2);
    CrossFrame { p: c.at.clone(), su, v: vref, h: href, so, e, ep }
}

impl CrossFrame {
    fn shift(&self, dx: &Rational, dy: &Rational) -> Pt {
        Pt::new(self.p.x.add_ref(dx), self.p.y.add_ref(dy))
    }

    /// Truncation and jog points for the oriented smoothing.
    fn jogs(&self) -> [Pt; 6] {
        let se = Rational::from_int(self.su) * self.e.clone();
        let sep = Rational::from_int(self.so) * self.ep.clone();
        let z = Rational::zero();
        let q1 = self.shift(&z, &se.clone().neg_ref());
        let q2 = Pt::new(self.p.x.add_ref(&sep), q1.y.clone());
        let q3 = self.shift(&sep, &z);
        let q4 = self.shift(&sep.neg_ref(), &z);
        let q5 = Pt::new(q4.x.clone(), self.p.y.add_ref(&se));
        let q6 = self.shift(&z, &se);
        [q1, q2, q3, q4, q5, q6]
    }
}

/// Replace the crossing by the orientation-coherent smoothing: the strand
/// arriving on the vertical continues onto the outgoing horizontal and vice
/// versa. Components merge or split accordingly.
fn smooth_geometric(d: &Diagram, cid: usize) -> Diagram {
    let f = frame(d, cid);
    let [q1, q2, q3, q4, q5, q6] = f.jogs();
    let cv = f.v.comp;
    let ch = f.h.comp;
    let mut comps: Vec<CompPath> = Vec::new();
    let mut replaced: Vec<CompPath> = Vec::new();
    if cv == ch {
        let c = &d.comps[cv];
        if c.open {
            // three pieces; the middle closes into a loop
            let nodes = explode_arc(c);
            let ends = seg_end_nodes_open(c);
            let first_is_v = f.v.seg < f.h.seg;
            let first_end = ends[if first_is_v { f.v.seg } else { f.h.seg }];
            let mut pre: Vec<SNode> = nodes[..first_end].to_vec();
            pre.push(SNode::P(f.p.clone()));
            let mut rest = vec![SNode::P(f.p.clone())];
            rest.extend_from_slice(&nodes[first_end..]);
            let (mid, post) = split_at_point(&rest[1..], &f.p)
                .expect("second pass not found on arc");
            // mid lacks its leading sentinel; rebuild with it
            let mut mid_full = vec![SNode::P(f.p.clone())];
            mid_full.extend_from_slice(&mid);
            let (arc, brid1, brid2, loop_trunc_in, loop_jog, loop_trunc_out) = if first_is_v {
                // pre ends V-in; jog to H-out which starts post
                (q1.clone(), q2.clone(), q3.clone(), q4.clone(), q5.clone(), q6.clone())
            } else {
                (q4.clone(), q5.clone(), q6.clone(), q1.clone(), q2.clone(), q3.clone())
            };
            let mut new_arc = pre;
            *new_arc.last_mut().unwrap() = SNode::P(arc);
            new_arc.push(SNode::P(brid1));
            new_arc.push(SNode::P(brid2));
            new_arc.extend_from_slice(&post[1..]);
            let mut lp: Vec<SNode> = mid_full[1..mid_full.len() - 1].to_vec();
            lp.push(SNode::P(loop_trunc_in));
            lp.push(SNode::P(loop_jog));
            lp.push(SNode::P(loop_trunc_out));
            replaced.push(arc_to_path(&new_arc));
            comps.push(cycle_to_path(&lp));
        } else {
            let cycle = explode_cycle(c);
            let ends = seg_end_nodes_closed(c);
            let linear = linearize_cycle(&cycle, ends[f.v.seg], &f.p);
            let (l1, l2) = split_at_point(&linear[1..linear.len() - 1], &f.p)
                .map(|(mut a, b)| {
                    a.insert(0, SNode::P(f.p.clone()));
                    let mut b2 = b;
                    b2.push(SNode::P(f.p.clone()));
                    (a, b2)
                })
                .expect("horizontal pass not found on cycle");
            // l1 = [V-out .. H-in], l2 = [H-out .. V-in]
            let mut c1: Vec<SNode> = l1[1..l1.len() - 1].to_vec();
            c1.push(SNode::P(q4.clone()));
            c1.push(SNode::P(q5.clone()));
            c1.push(SNode::P(q6.clone()));
            let mut c2: Vec<SNode> = l2[1..l2.len() - 1].to_vec();
            c2.push(SNode::P(q1.clone()));
            c2.push(SNode::P(q2.clone()));
            c2.push(SNode::P(q3.clone()));
            replaced.push(cycle_to_path(&c1));
            comps.push(cycle_to_path(&c2));
        }
    } else {
        // two components merge
        let comp_v = &d.comps[cv];
        let comp_h = &d.comps[ch];
        match (comp_v.open, comp_h.open) {
            (true, true) => panic!("cannot smooth a crossing between two arcs"),
            (false, false) => {
                let cyv = explode_cycle(comp_v);
                let cyh = explode_cycle(comp_h);
                let lv = linearize_cycle(&cyv, seg_end_nodes_closed(comp_v)[f.v.seg], &f.p);
                let lh = linearize_cycle(&cyh, seg_end_nodes_closed(comp_h)[f.h.seg], &f.p);
                let mut cy: Vec<SNode> = lv[1..lv.len() - 1].to_vec();
                cy.push(SNode::P(q1.clone()));
                cy.push(SNode::P(q2.clone()));
                cy.push(SNode::P(q3.clone()));
                cy.extend_from_slice(&lh[1..lh.len() - 1]);
                cy.push(SNode::P(q4.clone()));
                cy.push(SNode::P(q5.clone()));
                cy.push(SNode::P(q6.clone()));
                replaced.push(cycle_to_path(&cy));
            }
            (true, false) => {
                // arc carries the vertical pass
                let nodes = explode_arc(comp_v);
                let end = seg_end_nodes_open(comp_v)[f.v.seg];
                let cyh = explode_cycle(comp_h);
                let lh = linearize_cycle(&cyh, seg_end_nodes_closed(comp_h)[f.h.seg], &f.p);
                let mut new_arc: Vec<SNode> = nodes[..end].to_vec();
                new_arc.push(SNode::P(q1.clone()));
                new_arc.push(SNode::P(q2.clone()));
                new_arc.push(SNode::P(q3.clone()));
                new_arc.extend_from_slice(&lh[1..lh.len() - 1]);
                new_arc.push(SNode::P(q4.clone()));
                new_arc.push(SNode::P(q5.clone()));
                new_arc.push(SNode::P(q6.clone()));
                new_arc.extend_from_slice(&nodes[end..]);
                replaced.push(arc_to_path(&new_arc));
            }
            (false, true) => {
                let nodes = explode_arc(comp_h);
                let end = seg_end_nodes_open(comp_h)[f.h.seg];
                let cyv = explode_cycle(comp_v);
                let lv = linearize_cycle(&cyv, seg_end_nodes_closed(comp_v)[f.v.seg], &f.p);
                let mut new_arc: Vec<SNode> = nodes[..end].to_vec();
                new_arc.push(SNode::P(q4.clone()));
                new_arc.push(SNode::P(q5.clone()));
                new_arc.push(SNode::P(q6.clone()));
                new_arc.extend_from_slice(&lv[1..lv.len() - 1]);
                new_arc.push(SNode::P(q1.clone()));
                new_arc.push(SNode::P(q2.clone()));
                new_arc.push(SNode::P(q3.clone()));
                new_arc.extend_from_slice(&nodes[end..]);
                replaced.push(arc_to_path(&new_arc));
            }
        }
    }
    // reassemble: untouched components keep their slots, the reworked strand
    // takes the lower involved slot, any split-off loop goes to the end
    let mut new_comps: Vec<CompPath> = Vec::new();
    for (i, c) in d.comps.iter().enumerate() {
        if i == cv || i == ch {
            if !replaced.is_empty() && i == cv.min(ch) {
                new_comps.push(replaced[0].clone());
            }
            // the higher involved index is dropped (merge) or replaced by
            // the appended loop (split)
        } else {
            new_comps.push(c.clone());
        }
    }
    new_comps.extend(comps);
    let omap = d.over_map();
    let rule = move |at: &Pt, _v: &super::PassLoc, _h: &super::PassLoc| -> bool {
        *omap.get(at).expect("smoothing created an unexpected crossing")
    };
    let out = Diagram::assemble(d.surface.clone(), new_comps, &rule);
    assert_eq!(out.crossings.len(), d.crossings.len() - 1, "smoothing must drop one crossing");
    out
}

/// The Conway pair at a crossing: over/under switched, and the oriented
/// smoothing. The rest of the diagram is untouched.
pub fn conway_resolve(d: &Diagram, cid: usize) -> Result<(Diagram, Diagram), String> {
    if cid >= d.crossings.len() {
        return Err(format!("invalid crossing id {cid}"));
    }
    let mut switched = d.clone();
    {
        let c = &mut switched.crossings[cid];
        std::mem::swap(&mut c.over, &mut c.under);
        c.sign = -c.sign;
    }
    switched.validate();
    let smoothed = smooth_geometric(d, cid);
    Ok((switched, smoothed))
}

/// Crossing points lying strictly inside any segment of the node list.
pub(crate) fn events_on_piece(d: &Diagram, piece: &[SNode], skip: &Pt) -> usize {
    let mut count = 0;
    let mut cur = npos(&piece[0]).clone();
    for n in piece.iter().skip(1) {
        match n {
            SNode::P(q) => {
                for c in &d.crossings {
                    if c.at != *skip && on_open_segment(&cur, q, &c.at) {
                        count += 1;
                    }
                }
                cur = q.clone();
            }
            SNode::G { to, .. } => {
                count += 1; // gate traversals block kink/bigon removal
                cur = to.clone();
            }
        }
    }
    count
}

pub(crate) fn over_rule_from_map(
    omap: HashMap<Pt, bool>,
) -> impl Fn(&Pt, &super::PassLoc, &super::PassLoc) -> bool {
    move |at, _, _| *omap.get(at).expect("crossing without an inherited over/under")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::cyclic_reduce;

    fn annulus() -> Arc<SurfacePresentation> {
        SurfacePresentation::annulus()
    }

    fn core_class(s: &Arc<SurfacePresentation>) -> CyclicWord {
        cyclic_reduce(&s.parse_word("r1"))
    }

    #[test]
    fn stack_with_empty_is_identity() {
        let s = annulus();
        let d = route::draw_one(&s, &core_class(&s), 1);
        let e = Diagram::empty(s.clone());
        let out = stack(&d, &e).unwrap();
        assert_eq!(out.to_json(), d.to_json());
        let out2 = stack(&e, &d).unwrap();
        assert_eq!(out2.to_json(), d.to_json());
    }

    #[test]
    fn stacked_cores_do_not_cross() {
        let s = annulus();
        let d = route::draw_one(&s, &core_class(&s), 1);
        let out = stack(&d, &d).unwrap();
        assert_eq!(out.comps.len(), 2);
        assert_eq!(out.crossings.len(), 0);
    }

    #[test]
    fn core_over_double_winding_has_two_overlay_crossings() {
        let s = annulus();
        let d1 = route::draw_one(&s, &core_class(&s), 1);
        let d2 = route::draw_one(&s, &core_class(&s), 2);
        let out = stack(&d1, &d2).unwrap();
        // one self-crossing of the cable plus two overlay crossings
        assert_eq!(out.crossings.len(), 3);
        let mut overlay = 0;
        for c in &out.crossings {
            if c.over.comp != c.under.comp {
                overlay += 1;
                assert_eq!(c.over.comp, 0, "first stacked factor goes over");
            }
        }
        assert_eq!(overlay, 2);
    }

    #[test]
    fn smoothing_double_winding_splits_into_two_cores() {
        let s = annulus();
        let d = route::draw_one(&s, &core_class(&s), 2);
        assert_eq!(d.crossings.len(), 1);
        let (switched, smoothed) = conway_resolve(&d, 0).unwrap();
        assert_eq!(switched.crossings.len(), 1);
        assert_eq!(switched.writhe(), -d.writhe());
        assert_eq!(smoothed.comps.len(), 2);
        assert_eq!(smoothed.crossings.len(), 0);
        let code = smoothed.extract_code();
        assert_eq!(code.comp_class(0).len(), 1);
        assert_eq!(code.comp_class(1).len(), 1);
    }

    #[test]
    fn smoothing_hopf_overlay_merges() {
        let s = annulus();
        let d1 = route::draw_one(&s, &core_class(&s), 1);
        let d2 = route::draw_one(&s, &core_class(&s), 2);
        let out = stack(&d1, &d2).unwrap();
        let inter = out
            .crossings
            .iter()
            .position(|c| c.over.comp != c.under.comp)
            .unwrap();
        let (_, smoothed) = conway_resolve(&out, inter).unwrap();
        assert_eq!(smoothed.comps.len(), 1);
        assert_eq!(smoothed.crossings.len(), 2);
        assert_eq!(smoothed.extract_code().comp_class(0).len(), 3);
    }

    #[test]
    fn smoothing_arc_pass_keeps_arc() {
        let s = annulus();
        let loops = route::draw_one(&s, &core_class(&s), 1);
        let arc = route::standard_arc(&s, 1);
        let d = stack(&loops, &arc).unwrap();
        assert_eq!(d.crossings.len(), 1, "core meets the winding arc once");
        let (_, smoothed) = conway_resolve(&d, 0).unwrap();
        assert_eq!(smoothed.comps.len(), 1);
        assert!(smoothed.comps[0].open);
        let code = smoothed.extract_code();
        assert_eq!(code.arc_word(0).0.len(), 2);
    }

    #[test]
    fn conway_rejects_bad_id() {
        let s = annulus();
        let d = route::draw_one(&s, &core_class(&s), 1);
        assert!(conway_resolve(&d, 5).is_err());
    }

    #[test]
    fn draw_sorted_monomial_is_descending() {
        let s = SurfacePresentation::one_boundary(1);
        let a = cyclic_reduce(&s.parse_word("a1"));
        let b = cyclic_reduce(&s.parse_word("b1"));
        let d = draw(&s, &[(a, 1), (b, 1)]).unwrap();
        assert_eq!(d.comps.len(), 2);
        let code = d.extract_code();
        assert!(code.first_bad().is_none(), "stacked drawing stays descending");
    }
}
