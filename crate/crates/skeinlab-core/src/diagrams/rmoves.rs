//! Reidemeister moves as exact local surgeries.
//!
//! A move names its site through the crossing table and segment list.
//! Inapplicable sites return errors; applying a move revalidates the whole
//! diagram and checks the writhe bookkeeping (±1 under RI, 0 under RII and
//! RIII). Margins are sized off the diagram's coordinate gaps, so inserted
//! geometry can never collide with existing features.

use crate::coeffs::Rational;

use super::code::{Code, CompCode, Ev};
use super::ops::{
    arc_to_path, axis_gap, cycle_to_path, events_on_piece, explode_arc, explode_cycle,
    linearize_cycle, over_rule_from_map, seg_end_nodes_closed, seg_end_nodes_open,
    split_at_point, SNode,
};
use super::{Diagram, Dir, Pt, Seg, SegRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RMove {
    /// Put a kink of the given sign into an event-free stretch of a segment.
    R1Insert { seg: SegRef, sign: i8 },
    /// Remove a kink: a self-crossing with one empty loop side.
    R1Remove { id: usize },
    /// Push a finger of `finger` across the parallel `target` segment,
    /// passing over or under it.
    R2Insert { finger: SegRef, target: SegRef, over: bool },
    /// Cancel two opposite crossings bounding an empty bigon.
    R2Remove { id1: usize, id2: usize },
    /// Slide the corner after segment `seg` of component `comp` across
    /// crossing `id`.
    R3 { id: usize, comp: usize, seg: usize },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MoveFamily {
    R1Insert,
    R1Remove,
    R2Insert,
    R2Remove,
    R3,
}

fn dir_right(d: Dir) -> Dir {
    d.left().left().left()
}

fn pshift(p: &Pt, ux: i64, uy: i64, by: &Rational) -> Pt {
    Pt::new(
        p.x.add_ref(&(Rational::from_int(ux) * by.clone())),
        p.y.add_ref(&(Rational::from_int(uy) * by.clone())),
    )
}

fn seg_len(s: &Seg) -> Rational {
    if s.dir().vertical() {
        let (lo, hi) = (s.a.y.clone().min(s.b.y.clone()), s.a.y.clone().max(s.b.y.clone()));
        hi.sub_ref(&lo)
    } else {
        let (lo, hi) = (s.a.x.clone().min(s.b.x.clone()), s.a.x.clone().max(s.b.x.clone()));
        hi.sub_ref(&lo)
    }
}

/// Traversal parameter of a crossing point on its segment.
fn t_on(s: &Seg, at: &Pt) -> Rational {
    match s.dir() {
        Dir::N => at.y.sub_ref(&s.a.y),
        Dir::S => s.a.y.sub_ref(&at.y),
        Dir::E => at.x.sub_ref(&s.a.x),
        Dir::W => s.a.x.sub_ref(&at.x),
    }
}

fn insert_nodes(d: &Diagram, comp: usize, seg: usize, new: Vec<SNode>) -> super::CompPath {
    let c = &d.comps[comp];
    if c.open {
        let mut nodes = explode_arc(c);
        let e = seg_end_nodes_open(c)[seg];
        nodes.splice(e..e, new);
        arc_to_path(&nodes)
    } else {
        let mut cyc = explode_cycle(c);
        let e = seg_end_nodes_closed(c)[seg];
        cyc.splice(e..e, new);
        cycle_to_path(&cyc)
    }
}

fn apply_r1_insert(d: &Diagram, seg: SegRef, sign: i8) -> Result<Diagram, String> {
    if seg.comp >= d.comps.len() || seg.seg >= d.comps[seg.comp].segments().len() {
        return Err("no such segment".into());
    }
    if sign != 1 && sign != -1 {
        return Err("kink sign must be ±1".into());
    }
    let host = d.seg(seg);
    let len = seg_len(&host);
    let mut ts: Vec<Rational> = d
        .crossings
        .iter()
        .flat_map(|c| [(c.over, &c.at), (c.under, &c.at)])
        .filter(|(r, _)| *r == seg)
        .map(|(_, at)| t_on(&host, at))
        .collect();
    ts.sort();
    let mut bounds = vec![Rational::zero()];
    bounds.extend(ts);
    bounds.push(len);
    let mut best: Option<(Rational, Rational)> = None;
    for w in bounds.windows(2) {
        let g = w[1].sub_ref(&w[0]);
        if best.as_ref().is_none_or(|(bg, _)| &g > bg) {
            best = Some((g, w[0].clone()));
        }
    }
    let (gap, lo) = best.unwrap();
    let s = d.min_gap() * Rational::from_pair(1, 8);
    if gap < Rational::from_int(4) * s.clone() {
        return Err("no event-free room for a kink on this segment".into());
    }
    let q_t = lo.add_ref(&((gap - Rational::from_int(3) * s.clone()) * Rational::from_pair(1, 2)));
    let f = host.dir().unit();
    let l = host.dir().left().unit();
    let q = pshift(&host.a, f.0, f.1, &q_t);
    let at = |kf: i64, kl: i64| {
        let p = pshift(&q, f.0, f.1, &(Rational::from_int(kf) * s.clone()));
        pshift(&p, l.0, l.1, &(Rational::from_int(kl) * s.clone()))
    };
    let new = vec![
        SNode::P(at(2, 0)),
        SNode::P(at(2, 1)),
        SNode::P(at(1, 1)),
        SNode::P(at(1, -1)),
        SNode::P(at(3, -1)),
        SNode::P(at(3, 0)),
    ];
    let cross_pt = at(1, 0);
    let host_vertical = host.dir().vertical();
    let mut comps = d.comps.clone();
    comps[seg.comp] = insert_nodes(d, seg.comp, seg.seg, new);
    let mut omap = d.over_map();
    omap.insert(cross_pt, (sign > 0) != host_vertical);
    let out = Diagram::assemble(d.surface.clone(), comps, &over_rule_from_map(omap));
    assert_eq!(out.crossings.len(), d.crossings.len() + 1);
    assert_eq!(out.writhe(), d.writhe() + sign as i64);
    Ok(out)
}

fn apply_r1_remove(d: &Diagram, id: usize) -> Result<Diagram, String> {
    let c = d.crossings.get(id).ok_or("no such crossing")?;
    if c.over.comp != c.under.comp {
        return Err("crossing is not a self-crossing".into());
    }
    let ci = c.over.comp;
    let p = c.at.clone();
    let comp = &d.comps[ci];
    let new_comp = if comp.open {
        let nodes = explode_arc(comp);
        let (pre, rest) =
            split_at_point(&nodes, &p).ok_or("crossing not on its component")?;
        let (mid, post) =
            split_at_point(&rest, &p).ok_or("second pass not found")?;
        if events_on_piece(d, &mid, &p) != 0 {
            return Err("kink loop is not empty".into());
        }
        let mut nodes = pre;
        nodes.extend_from_slice(&post[1..]);
        arc_to_path(&nodes)
    } else {
        let cyc = explode_cycle(comp);
        let e = seg_end_nodes_closed(comp)[c.over.seg];
        let linear = linearize_cycle(&cyc, e, &p);
        let (mid, rest) = split_at_point(&linear, &p).ok_or("second pass not found")?;
        let mid_clean = events_on_piece(d, &mid, &p) == 0;
        let rest_clean = events_on_piece(d, &rest, &p) == 0;
        let keep = if mid_clean && rest_clean {
            // both sides empty: drop the shorter loop
            if mid.len() <= rest.len() {
                &rest
            } else {
                &mid
            }
        } else if mid_clean {
            &rest
        } else if rest_clean {
            &mid
        } else {
            return Err("kink loop is not empty".into());
        };
        let mut cyc: Vec<SNode> = keep[1..keep.len() - 1].to_vec();
        cyc.push(SNode::P(p.clone()));
        cycle_to_path(&cyc)
    };
    let sign = c.sign;
    let mut comps = d.comps.clone();
    comps[ci] = new_comp;
    let out = Diagram::assemble(d.surface.clone(), comps, &over_rule_from_map(d.over_map()));
    assert_eq!(out.crossings.len(), d.crossings.len() - 1);
    assert_eq!(out.writhe(), d.writhe() - sign as i64);
    Ok(out)
}

fn line_coord(s: &Seg) -> Rational {
    if s.dir().vertical() {
        s.a.x.clone()
    } else {
        s.a.y.clone()
    }
}

fn along_range(s: &Seg) -> (Rational, Rational) {
    if s.dir().vertical() {
        (s.a.y.clone().min(s.b.y.clone()), s.a.y.clone().max(s.b.y.clone()))
    } else {
        (s.a.x.clone().min(s.b.x.clone()), s.a.x.clone().max(s.b.x.clone()))
    }
}

fn pt_at(vertical: bool, line: &Rational, along: &Rational) -> Pt {
    if vertical {
        Pt::new(line.clone(), along.clone())
    } else {
        Pt::new(along.clone(), line.clone())
    }
}

/// Does the segment meet the open axis-parallel rectangle?
fn seg_meets_open_rect(
    s: &Seg,
    (x0, x1): (&Rational, &Rational),
    (y0, y1): (&Rational, &Rational),
) -> bool {
    let (xlo, xhi) = if s.a.x <= s.b.x {
        (&s.a.x, &s.b.x)
    } else {
        (&s.b.x, &s.a.x)
    };
    let (ylo, yhi) = if s.a.y <= s.b.y {
        (&s.a.y, &s.b.y)
    } else {
        (&s.b.y, &s.a.y)
    };
    xlo < x1 && x0 < xhi && ylo < y1 && y0 < yhi
}

fn apply_r2_insert(
    d: &Diagram,
    finger: SegRef,
    target: SegRef,
    over: bool,
) -> Result<Diagram, String> {
    for r in [finger, target] {
        if r.comp >= d.comps.len() || r.seg >= d.comps[r.comp].segments().len() {
            return Err("no such segment".into());
        }
    }
    if finger == target {
        return Err("finger and target must differ".into());
    }
    let s1 = d.seg(finger);
    let s2 = d.seg(target);
    let vertical = s1.dir().vertical();
    if vertical != s2.dir().vertical() {
        return Err("finger and target are not parallel".into());
    }
    let c1 = line_coord(&s1);
    let c2 = line_coord(&s2);
    if c1 == c2 {
        return Err("finger and target are collinear".into());
    }
    let (lo1, hi1) = along_range(&s1);
    let (lo2, hi2) = along_range(&s2);
    let ov_lo = lo1.max(lo2);
    let ov_hi = hi1.min(hi2);
    if ov_lo >= ov_hi {
        return Err("segments do not overlap along their axis".into());
    }
    let s = d.min_gap() * Rational::from_pair(1, 8);
    let toward = if c2 > c1 { 1i64 } else { -1 };
    let tip = c2.add_ref(&(Rational::from_int(toward) * s.clone()));
    let (cr_lo, cr_hi) = if c1 < tip {
        (c1.clone(), tip.clone())
    } else {
        (tip.clone(), c1.clone())
    };
    let span = ov_hi.sub_ref(&ov_lo);
    let two_s = Rational::from_int(2) * s.clone();
    let mut chosen: Option<Rational> = None;
    'cand: for j in 1..8i64 {
        let q = ov_lo.add_ref(&(span.clone() * Rational::from_pair(j, 8)));
        if q.sub_ref(&two_s) <= ov_lo || q.add_ref(&two_s) >= ov_hi {
            continue;
        }
        let (a_lo, a_hi) = (q.sub_ref(&two_s), q.add_ref(&two_s));
        let (rx, ry) = if vertical {
            // along axis is y
            ((cr_lo.clone(), cr_hi.clone()), (a_lo, a_hi))
        } else {
            ((a_lo, a_hi), (cr_lo.clone(), cr_hi.clone()))
        };
        for (r, sg) in d.all_segments() {
            if r == finger || r == target {
                continue;
            }
            if seg_meets_open_rect(&sg, (&rx.0, &rx.1), (&ry.0, &ry.1)) {
                continue 'cand;
            }
        }
        chosen = Some(q);
        break;
    }
    let q = chosen.ok_or("no free corridor between the segments")?;
    // a1 comes first in traversal order
    let u = match s1.dir() {
        Dir::N | Dir::E => 1i64,
        _ => -1,
    };
    let a1_along = q.sub_ref(&(Rational::from_int(u) * s.clone()));
    let a4_along = q.add_ref(&(Rational::from_int(u) * s.clone()));
    let a1 = pt_at(vertical, &c1, &a1_along);
    let a4 = pt_at(vertical, &c1, &a4_along);
    let a2 = pt_at(vertical, &tip, &a1_along);
    let a3 = pt_at(vertical, &tip, &a4_along);
    let new = vec![SNode::P(a1), SNode::P(a2), SNode::P(a3), SNode::P(a4)];
    let pt1 = pt_at(vertical, &c2, &a1_along);
    let pt2 = pt_at(vertical, &c2, &a4_along);
    let arm_vertical = !vertical;
    let mut omap = d.over_map();
    omap.insert(pt1, arm_vertical == over);
    omap.insert(pt2, arm_vertical == over);
    let mut comps = d.comps.clone();
    comps[finger.comp] = insert_nodes(d, finger.comp, finger.seg, new);
    let out = Diagram::assemble(d.surface.clone(), comps, &over_rule_from_map(omap));
    assert_eq!(out.crossings.len(), d.crossings.len() + 2);
    assert_eq!(out.writhe(), d.writhe());
    Ok(out)
}

/// Positions (comp, event index) of the over and under pass of a crossing in
/// an extracted code.
fn pass_positions(code: &Code, id: usize) -> ((usize, usize), (usize, usize)) {
    let mut over = None;
    let mut under = None;
    for (ci, c) in code.comps.iter().enumerate() {
        for (ei, e) in c.events.iter().enumerate() {
            if let Ev::Cross { id: i, over: o } = e {
                if *i == id {
                    if *o {
                        over = Some((ci, ei));
                    } else {
                        under = Some((ci, ei));
                    }
                }
            }
        }
    }
    (over.expect("over pass"), under.expect("under pass"))
}

/// If events a and b are adjacent along the component, tell whether a comes
/// first.
fn adjacent_first(comp: &CompCode, a: usize, b: usize) -> Option<bool> {
    let n = comp.events.len();
    if b == a + 1 {
        return Some(true);
    }
    if a == b + 1 {
        return Some(false);
    }
    if !comp.open && n >= 2 {
        if a == n - 1 && b == 0 {
            return Some(true);
        }
        if b == n - 1 && a == 0 {
            return Some(false);
        }
    }
    None
}

/// The traversal piece from a cut on `from` at `from_pt` forward to the first
/// interior hit of `to_pt`, sentinels included.
fn forward_piece(
    d: &Diagram,
    from: SegRef,
    from_pt: &Pt,
    to_pt: &Pt,
) -> Result<Vec<SNode>, String> {
    let comp = &d.comps[from.comp];
    if comp.open {
        let nodes = explode_arc(comp);
        let e = seg_end_nodes_open(comp)[from.seg];
        let mut rest = vec![SNode::P(from_pt.clone())];
        rest.extend_from_slice(&nodes[e..]);
        let (mid, _) = split_at_point(&rest, to_pt).ok_or("strand piece not found")?;
        Ok(mid)
    } else {
        let cyc = explode_cycle(comp);
        let linear = linearize_cycle(&cyc, seg_end_nodes_closed(comp)[from.seg], from_pt);
        let (mid, _) = split_at_point(&linear, to_pt).ok_or("strand piece not found")?;
        Ok(mid)
    }
}

fn apply_r2_remove(d: &Diagram, id1: usize, id2: usize) -> Result<Diagram, String> {
    if id1 == id2 || id1 >= d.crossings.len() || id2 >= d.crossings.len() {
        return Err("need two distinct crossings".into());
    }
    let cr1 = &d.crossings[id1];
    let cr2 = &d.crossings[id2];
    if cr1.sign + cr2.sign != 0 {
        return Err("crossing signs are not opposite".into());
    }
    let code = d.extract_code();
    let (o1, u1) = pass_positions(&code, id1);
    let (o2, u2) = pass_positions(&code, id2);
    if o1.0 != o2.0 || u1.0 != u2.0 {
        return Err("passes do not pair up along two strands".into());
    }
    let o_first_is_1 = adjacent_first(&code.comps[o1.0], o1.1, o2.1)
        .ok_or("over passes are not adjacent")?;
    let u_first_is_1 = adjacent_first(&code.comps[u1.0], u1.1, u2.1)
        .ok_or("under passes are not adjacent")?;
    let (o_first, _o_second) = if o_first_is_1 { (id1, id2) } else { (id2, id1) };
    let (u_first, u_second) = if u_first_is_1 { (id1, id2) } else { (id2, id1) };
    let pa_o = d.crossings[o_first].at.clone();
    let pb_o = d.crossings[if o_first == id1 { id2 } else { id1 }].at.clone();
    let pa_u = d.crossings[u_first].at.clone();
    let pb_u = d.crossings[u_second].at.clone();
    let guide_piece = forward_piece(d, d.crossings[o_first].over, &pa_o, &pb_o)?;
    if guide_piece.iter().any(|n| matches!(n, SNode::G { .. })) {
        return Err("bigon side passes through a gate".into());
    }
    let mut guide: Vec<Pt> = guide_piece
        .iter()
        .map(|n| match n {
            SNode::P(p) => p.clone(),
            SNode::G { .. } => unreachable!(),
        })
        .collect();
    if pa_u != pa_o {
        guide.reverse();
    }
    let dirs: Vec<Dir> = guide.windows(2).map(|w| Dir::of(&w[0], &w[1])).collect();
    let u_in_seg = d.seg(d.crossings[u_first].under);
    let (ux, uy) = u_in_seg.dir().unit();
    let (d0x, d0y) = dirs[0].unit();
    let sigma = -d0x * uy + d0y * ux; // det(guide dir, -u_in)
    assert!(sigma == 1 || sigma == -1);
    let normal = |dd: Dir| -> (i64, i64) {
        if sigma > 0 {
            dd.left().unit()
        } else {
            dir_right(dd).unit()
        }
    };
    let eps = d.min_gap() * Rational::from_pair(1, 8);
    let m = dirs.len();
    let mut qs: Vec<Pt> = Vec::with_capacity(m + 1);
    {
        let n0 = normal(dirs[0]);
        qs.push(pshift(&guide[0], n0.0, n0.1, &eps));
    }
    for i in 1..m {
        let (na, nb) = (normal(dirs[i - 1]), normal(dirs[i]));
        let shifted = |k: usize, n: (i64, i64)| -> (Rational, Rational) {
            // line through guide segment k shifted by eps toward n; returns
            // (x of line) for vertical, (y of line) for horizontal as needed
            let p = pshift(&guide[k], n.0, n.1, &eps);
            (p.x, p.y)
        };
        let (pa, pb) = (shifted(i - 1, na), shifted(i, nb));
        let q = if dirs[i - 1].vertical() {
            Pt::new(pa.0, pb.1)
        } else {
            Pt::new(pb.0, pa.1)
        };
        qs.push(q);
    }
    {
        let nl = normal(dirs[m - 1]);
        qs.push(pshift(&guide[m], nl.0, nl.1, &eps));
    }
    // rebuild the under component with its middle replaced by the offset path
    let u_ref = d.crossings[u_first].under;
    let comp = &d.comps[u_ref.comp];
    let new_comp = if comp.open {
        let nodes = explode_arc(comp);
        let e = seg_end_nodes_open(comp)[u_ref.seg];
        let mut pre: Vec<SNode> = nodes[..e].to_vec();
        pre.push(SNode::P(qs[0].clone()));
        let mut rest = vec![SNode::P(pa_u.clone())];
        rest.extend_from_slice(&nodes[e..]);
        let (mid, post) = split_at_point(&rest, &pb_u).ok_or("under middle not found")?;
        if mid.iter().any(|n| matches!(n, SNode::G { .. })) {
            return Err("bigon side passes through a gate".into());
        }
        for q in &qs[1..] {
            pre.push(SNode::P(q.clone()));
        }
        pre.extend_from_slice(&post[1..]);
        arc_to_path(&pre)
    } else {
        let cyc = explode_cycle(comp);
        let linear = linearize_cycle(&cyc, seg_end_nodes_closed(comp)[u_ref.seg], &pa_u);
        let (mid, rest) = split_at_point(&linear, &pb_u).ok_or("under middle not found")?;
        if mid.iter().any(|n| matches!(n, SNode::G { .. })) {
            return Err("bigon side passes through a gate".into());
        }
        let mut nodes: Vec<SNode> = qs[1..].iter().map(|q| SNode::P(q.clone())).collect();
        nodes.extend_from_slice(&rest[1..rest.len() - 1]);
        nodes.push(SNode::P(qs[0].clone()));
        cycle_to_path(&nodes)
    };
    let mut comps = d.comps.clone();
    comps[u_ref.comp] = new_comp;
    let out = Diagram::assemble(d.surface.clone(), comps, &over_rule_from_map(d.over_map()));
    assert_eq!(out.crossings.len(), d.crossings.len() - 2);
    assert_eq!(out.writhe(), d.writhe());
    Ok(out)
}

struct R3Site {
    /// corner vertex
    w: Pt,
    /// crossing point
    c_at: Pt,
    /// arm-over-strand points: horizontal arm on the vertical strand,
    /// vertical arm on the horizontal strand
    cv_at: Pt,
    ch_at: Pt,
    /// corner of the displaced path
    xa: Rational,
    yb: Rational,
    /// does traversal enter the corner along the horizontal arm
    horizontal_first: bool,
}

fn r3_site(d: &Diagram, id: usize, comp: usize, seg: usize) -> Result<R3Site, String> {
    let c = d.crossings.get(id).ok_or("no such crossing")?;
    if comp >= d.comps.len() {
        return Err("no such component".into());
    }
    let segs = d.comps[comp].segments();
    let n = segs.len();
    if n < 2 || seg >= n {
        return Err("no such corner".into());
    }
    let jn = (seg + 1) % n;
    if d.comps[comp].open && jn == 0 {
        return Err("no corner after the last segment of an arc".into());
    }
    let s_j = &segs[seg];
    let s_k = &segs[jn];
    if s_j.b != s_k.a {
        return Err("segments are not joined at a corner".into());
    }
    let w = s_j.b.clone();
    let horizontal_first = !s_j.dir().vertical();
    let (arm_h, arm_v) = if horizontal_first {
        (SegRef { comp, seg }, SegRef { comp, seg: jn })
    } else {
        (SegRef { comp, seg: jn }, SegRef { comp, seg })
    };
    let (v, hz) = if d.seg(c.over).dir().vertical() {
        (c.over, c.under)
    } else {
        (c.under, c.over)
    };
    if arm_h == hz || arm_v == v {
        return Err("corner arms coincide with the crossing strands".into());
    }
    let (xc, yc) = (c.at.x.clone(), c.at.y.clone());
    let (xe, ye) = (w.x.clone(), w.y.clone());
    if xc == xe || yc == ye {
        return Err("corner sits on the crossing lines".into());
    }
    let find = |a: SegRef, b: SegRef| -> Option<Pt> {
        d.crossings
            .iter()
            .find(|cr| (cr.over == a && cr.under == b) || (cr.over == b && cr.under == a))
            .map(|cr| cr.at.clone())
    };
    let cv_at = find(arm_h, v).ok_or("horizontal arm does not cross the vertical strand")?;
    let ch_at = find(arm_v, hz).ok_or("vertical arm does not cross the horizontal strand")?;
    if cv_at != Pt::new(xc.clone(), ye.clone()) || ch_at != Pt::new(xe.clone(), yc.clone()) {
        return Err("arm crossings do not bound the triangle".into());
    }
    let (xs, ys) = d.coordinate_values();
    let dx = axis_gap(&xs, &xc) * Rational::from_pair(1, 2);
    let dy = axis_gap(&ys, &yc) * Rational::from_pair(1, 2);
    let sx = if xe > xc { 1i64 } else { -1 };
    let sy = if yc > ye { 1i64 } else { -1 };
    let xa = xc.sub_ref(&(Rational::from_int(sx) * dx));
    let yb = yc.add_ref(&(Rational::from_int(sy) * dy));
    let (rx0, rx1) = (xa.clone().min(xe.clone()), xa.clone().max(xe.clone()));
    let (ry0, ry1) = (ye.clone().min(yb.clone()), ye.clone().max(yb.clone()));
    for (r, sg) in d.all_segments() {
        if r == v || r == hz || r == arm_h || r == arm_v {
            continue;
        }
        if seg_meets_open_rect(&sg, (&rx0, &rx1), (&ry0, &ry1)) {
            return Err("triangle region is not empty".into());
        }
    }
    Ok(R3Site { w, c_at: c.at.clone(), cv_at, ch_at, xa, yb, horizontal_first })
}

fn apply_r3(d: &Diagram, id: usize, comp: usize, seg: usize) -> Result<Diagram, String> {
    let site = r3_site(d, id, comp, seg)?;
    let (xe, ye) = (site.w.x.clone(), site.w.y.clone());
    let triple = if site.horizontal_first {
        vec![
            SNode::P(Pt::new(site.xa.clone(), ye.clone())),
            SNode::P(Pt::new(site.xa.clone(), site.yb.clone())),
            SNode::P(Pt::new(xe.clone(), site.yb.clone())),
        ]
    } else {
        vec![
            SNode::P(Pt::new(xe.clone(), site.yb.clone())),
            SNode::P(Pt::new(site.xa.clone(), site.yb.clone())),
            SNode::P(Pt::new(site.xa.clone(), ye.clone())),
        ]
    };
    let cpath = &d.comps[comp];
    let new_comp = if cpath.open {
        let mut nodes = explode_arc(cpath);
        let e = seg_end_nodes_open(cpath)[seg];
        assert!(matches!(&nodes[e], SNode::P(p) if *p == site.w));
        nodes.splice(e..e + 1, triple);
        arc_to_path(&nodes)
    } else {
        let mut cyc = explode_cycle(cpath);
        let e = seg_end_nodes_closed(cpath)[seg];
        assert!(matches!(&cyc[e], SNode::P(p) if *p == site.w));
        cyc.splice(e..e + 1, triple);
        cycle_to_path(&cyc)
    };
    let mut omap = d.over_map();
    let vo_cv = omap[&site.cv_at];
    let vo_ch = omap[&site.ch_at];
    omap.insert(Pt::new(site.xa.clone(), site.c_at.y.clone()), vo_ch);
    omap.insert(Pt::new(site.c_at.x.clone(), site.yb.clone()), vo_cv);
    let mut comps = d.comps.clone();
    comps[comp] = new_comp;
    let out = Diagram::assemble(d.surface.clone(), comps, &over_rule_from_map(omap));
    assert_eq!(out.crossings.len(), d.crossings.len());
    assert_eq!(out.writhe(), d.writhe());
    Ok(out)
}

/// The eight RIII variants: which of the three strands passes over which,
/// read off the triangle's crossings. The corner strand is e; letters a-d
/// encode (e over the vertical strand, e over the horizontal strand) and the
/// prime marks the vertical strand passing under the horizontal one.
pub fn r3_variant(d: &Diagram, mv: &RMove) -> Result<String, String> {
    let RMove::R3 { id, comp, seg } = mv else {
        return Err("not a triangle move".into());
    };
    let site = r3_site(d, *id, *comp, *seg)?;
    let omap = d.over_map();
    let e_over_v = !omap[&site.cv_at];
    let e_over_hz = omap[&site.ch_at];
    let v_over_hz = omap[&site.c_at];
    let letter = ['a', 'b', 'c', 'd'][(e_over_v as usize) * 2 + e_over_hz as usize];
    Ok(format!("RIII-{}{}", letter, if v_over_hz { "" } else { "'" }))
}

pub fn reidemeister(d: &Diagram, mv: &RMove) -> Result<Diagram, String> {
    match mv {
        RMove::R1Insert { seg, sign } => apply_r1_insert(d, *seg, *sign),
        RMove::R1Remove { id } => apply_r1_remove(d, *id),
        RMove::R2Insert { finger, target, over } => apply_r2_insert(d, *finger, *target, *over),
        RMove::R2Remove { id1, id2 } => apply_r2_remove(d, *id1, *id2),
        RMove::R3 { id, comp, seg } => apply_r3(d, *id, *comp, *seg),
    }
}

/// Syntactic candidate sites for one family; `reidemeister` decides actual
/// applicability.
pub fn candidates(d: &Diagram, fam: MoveFamily) -> Vec<RMove> {
    let mut out = Vec::new();
    match fam {
        MoveFamily::R1Insert => {
            for (r, _) in d.all_segments() {
                for sign in [1i8, -1] {
                    out.push(RMove::R1Insert { seg: r, sign });
                }
            }
        }
        MoveFamily::R1Remove => {
            for (id, c) in d.crossings.iter().enumerate() {
                if c.over.comp == c.under.comp {
                    out.push(RMove::R1Remove { id });
                }
            }
        }
        MoveFamily::R2Insert => {
            let segs = d.all_segments();
            for (r1, s1) in &segs {
                for (r2, s2) in &segs {
                    if r1 == r2 || s1.dir().vertical() != s2.dir().vertical() {
                        continue;
                    }
                    if line_coord(s1) == line_coord(s2) {
                        continue;
                    }
                    let (lo1, hi1) = along_range(s1);
                    let (lo2, hi2) = along_range(s2);
                    if lo1.max(lo2) >= hi1.min(hi2) {
                        continue;
                    }
                    for over in [true, false] {
                        out.push(RMove::R2Insert { finger: *r1, target: *r2, over });
                    }
                }
            }
        }
        MoveFamily::R2Remove => {
            for i in 0..d.crossings.len() {
                for j in (i + 1)..d.crossings.len() {
                    if d.crossings[i].sign + d.crossings[j].sign == 0 {
                        out.push(RMove::R2Remove { id1: i, id2: j });
                    }
                }
            }
        }
        MoveFamily::R3 => {
            for id in 0..d.crossings.len() {
                for (ci, c) in d.comps.iter().enumerate() {
                    let segs = c.segments();
                    let n = segs.len();
                    if n < 2 {
                        continue;
                    }
                    let last = if c.open { n - 1 } else { n };
                    for j in 0..last {
                        if segs[j].b == segs[(j + 1) % n].a {
                            out.push(RMove::R3 { id, comp: ci, seg: j });
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagrams::{ops, route, CompPath, Step};
    use crate::surface::{cyclic_reduce, SurfacePresentation};
    use std::sync::Arc;

    fn core(s: &Arc<SurfacePresentation>) -> Diagram {
        route::draw_one(s, &cyclic_reduce(&s.parse_word("r1")), 1)
    }

    #[test]
    fn kink_insert_remove_roundtrip() {
        let s = SurfacePresentation::annulus();
        let d = core(&s);
        let key = d.extract_code().canonical_key();
        for sign in [1i8, -1] {
            let seg = SegRef { comp: 0, seg: 0 };
            let kinked = reidemeister(&d, &RMove::R1Insert { seg, sign }).unwrap();
            assert_eq!(kinked.crossings.len(), 1);
            assert_eq!(kinked.writhe(), sign as i64);
            let (_, kinks, _) = kinked.extract_code().cleanup();
            assert_eq!(kinks, sign as i64);
            let back = reidemeister(&kinked, &RMove::R1Remove { id: 0 }).unwrap();
            assert_eq!(back.crossings.len(), 0);
            assert_eq!(back.extract_code().canonical_key(), key);
        }
    }

    #[test]
    fn finger_insert_remove_roundtrip() {
        let s = SurfacePresentation::annulus();
        let d = ops::stack(&core(&s), &core(&s)).unwrap();
        assert_eq!(d.crossings.len(), 0);
        let key = d.extract_code().canonical_key();
        let mut done = false;
        for mv in candidates(&d, MoveFamily::R2Insert) {
            let RMove::R2Insert { finger, target, over } = mv else { unreachable!() };
            if finger.comp == target.comp || !over {
                continue;
            }
            if let Ok(pushed) = reidemeister(&d, &mv) {
                assert_eq!(pushed.crossings.len(), 2);
                assert_eq!(pushed.writhe(), 0);
                // finger passes over at both new crossings
                for c in &pushed.crossings {
                    assert_eq!(c.over.comp, finger.comp);
                    assert_eq!(c.under.comp, target.comp);
                }
                let back = reidemeister(&pushed, &RMove::R2Remove { id1: 0, id2: 1 }).unwrap();
                assert_eq!(back.crossings.len(), 0);
                assert_eq!(back.extract_code().canonical_key(), key);
                done = true;
                break;
            }
        }
        assert!(done, "no applicable finger move found");
    }

    #[test]
    fn finger_under_goes_under() {
        let s = SurfacePresentation::annulus();
        let d = ops::stack(&core(&s), &core(&s)).unwrap();
        for mv in candidates(&d, MoveFamily::R2Insert) {
            let RMove::R2Insert { finger, target, over } = mv else { unreachable!() };
            if finger.comp == target.comp || over {
                continue;
            }
            if let Ok(pushed) = reidemeister(&d, &mv) {
                for c in &pushed.crossings {
                    assert_eq!(c.over.comp, target.comp);
                    assert_eq!(c.under.comp, finger.comp);
                }
                return;
            }
        }
        panic!("no applicable finger move found");
    }

    fn rect(x0: i64, y0: i64, x1: i64, y1: i64) -> CompPath {
        CompPath {
            start: Pt::of(x0, y0),
            steps: vec![
                Step::Line(Pt::of(x1, y0)),
                Step::Line(Pt::of(x1, y1)),
                Step::Line(Pt::of(x0, y1)),
                Step::Line(Pt::of(x0, y0)),
            ],
            open: false,
        }
    }

    /// Three rectangles forming one triangle site: a tall strand, a wide
    /// strand crossing it, and a corner poking into the wedge.
    fn triangle_diagram() -> Diagram {
        let s = SurfacePresentation::disk();
        let comps = vec![rect(20, 20, 45, 80), rect(10, 40, 30, 90), rect(15, 35, 23, 43)];
        Diagram::assemble(s, comps, &|_, _, _| true)
    }

    #[test]
    fn triangle_slide_roundtrip() {
        let d = triangle_diagram();
        assert_eq!(d.crossings.len(), 6);
        let key = d.extract_code().canonical_key();
        let wr = d.writhe();
        // find the (unique) applicable slide and its variant
        let mut slid = None;
        for mv in candidates(&d, MoveFamily::R3) {
            if let Ok(out) = reidemeister(&d, &mv) {
                let variant = r3_variant(&d, &mv).unwrap();
                slid = Some((out, variant));
                break;
            }
        }
        let (flipped, variant) = slid.expect("no applicable triangle slide");
        assert_eq!(flipped.crossings.len(), 6);
        assert_eq!(flipped.writhe(), wr);
        assert_ne!(flipped.extract_code().canonical_key(), key, "slide must change the code");
        // sliding back restores the code and the variant
        let mut restored = false;
        for mv in candidates(&flipped, MoveFamily::R3) {
            if let Ok(back) = reidemeister(&flipped, &mv) {
                if back.extract_code().canonical_key() == key {
                    assert_eq!(r3_variant(&flipped, &mv).unwrap(), variant);
                    restored = true;
                    break;
                }
            }
        }
        assert!(restored, "no inverse slide found");
    }

    #[test]
    fn kink_insert_needs_room() {
        let s = SurfacePresentation::annulus();
        let d = core(&s);
        // a bogus segment reference is rejected, not a panic
        assert!(reidemeister(&d, &RMove::R1Insert { seg: SegRef { comp: 0, seg: 99 }, sign: 1 })
            .is_err());
        assert!(reidemeister(&d, &RMove::R1Remove { id: 0 }).is_err());
    }

    #[test]
    fn self_bigon_removal() {
        // push a finger of a component across its own parallel segment, then
        // cancel the bigon again
        let s = SurfacePresentation::disk();
        let d = Diagram::assemble(s, vec![rect(20, 20, 40, 60)], &|_, _, _| true);
        let key = d.extract_code().canonical_key();
        let mut done = false;
        for mv in candidates(&d, MoveFamily::R2Insert) {
            if let Ok(pushed) = reidemeister(&d, &mv) {
                assert_eq!(pushed.crossings.len(), 2);
                let back = reidemeister(&pushed, &RMove::R2Remove { id1: 0, id2: 1 });
                if let Ok(back) = back {
                    assert_eq!(back.extract_code().canonical_key(), key);
                    done = true;
                    break;
                }
            }
        }
        assert!(done, "no self-finger roundtrip found");
    }
}
