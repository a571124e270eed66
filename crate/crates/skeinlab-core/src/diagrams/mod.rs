//! Piecewise-linear tangle diagrams in the model rectangle.
//!
//! All strands are rectilinear with exact rational coordinates: every segment
//! is horizontal or vertical, all parallel features sit at distinct
//! coordinates, so intersection tests are exact and crossings are always a
//! vertical meeting a horizontal. Band traversals leave the rectangle through
//! a gate interval on the top edge and re-enter through the partner gate.
//!
//! Diagrams are immutable; operations build new ones. The combinatorial
//! traversal code (see [`code`]) is derived on demand and is what the skein
//! reducer consumes.

pub mod code;
pub mod embed;
pub mod ops;
pub mod pd;
pub mod rmoves;
pub mod route;
pub mod twist;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::coeffs::Rational;
use crate::surface::{Letter, SurfacePresentation};
use code::{Code, CompCode, Ev};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Pt {
    pub x: Rational,
    pub y: Rational,
}

impl Pt {
    pub fn new(x: Rational, y: Rational) -> Self {
        Pt { x, y }
    }

    pub fn of(x: i64, y: i64) -> Self {
        Pt { x: Rational::from_int(x), y: Rational::from_int(y) }
    }
}

/// Axis direction of an oriented segment.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    E,
    W,
    N,
    S,
}

impl Dir {
    pub fn of(a: &Pt, b: &Pt) -> Dir {
        if a.y == b.y {
            if a.x < b.x {
                Dir::E
            } else {
                Dir::W
            }
        } else if a.y < b.y {
            Dir::N
        } else {
            Dir::S
        }
    }

    pub fn vertical(self) -> bool {
        matches!(self, Dir::N | Dir::S)
    }

    /// Left-hand normal.
    pub fn left(self) -> Dir {
        match self {
            Dir::E => Dir::N,
            Dir::N => Dir::W,
            Dir::W => Dir::S,
            Dir::S => Dir::E,
        }
    }

    pub fn unit(self) -> (i64, i64) {
        match self {
            Dir::E => (1, 0),
            Dir::W => (-1, 0),
            Dir::N => (0, 1),
            Dir::S => (0, -1),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Step {
    Line(Pt),
    /// Leave the rectangle through the gate containing the current point and
    /// re-enter at `to`. Both points lie on the top edge.
    Jump { letter: Letter, to: Pt },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompPath {
    pub start: Pt,
    pub steps: Vec<Step>,
    pub open: bool,
}

/// An oriented segment of a component, with its index among that component's
/// segments.
#[derive(Clone, Debug)]
pub struct Seg {
    pub a: Pt,
    pub b: Pt,
}

impl Seg {
    pub fn dir(&self) -> Dir {
        Dir::of(&self.a, &self.b)
    }

    fn x_range(&self) -> (Rational, Rational) {
        if self.a.x <= self.b.x {
            (self.a.x.clone(), self.b.x.clone())
        } else {
            (self.b.x.clone(), self.a.x.clone())
        }
    }

    fn y_range(&self) -> (Rational, Rational) {
        if self.a.y <= self.b.y {
            (self.a.y.clone(), self.b.y.clone())
        } else {
            (self.b.y.clone(), self.a.y.clone())
        }
    }
}

impl CompPath {
    /// The polyline segments (jumps contribute none).
    pub fn segments(&self) -> Vec<Seg> {
        let mut out = Vec::new();
        let mut cur = self.start.clone();
        for s in &self.steps {
            match s {
                Step::Line(p) => {
                    out.push(Seg { a: cur.clone(), b: p.clone() });
                    cur = p.clone();
                }
                Step::Jump { to, .. } => {
                    cur = to.clone();
                }
            }
        }
        out
    }

}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct SegRef {
    pub comp: usize,
    pub seg: usize,
}

#[derive(Clone, Debug)]
pub struct Crossing {
    pub at: Pt,
    pub over: SegRef,
    pub under: SegRef,
    pub sign: i8,
}

/// Location of one strand's pass through a crossing, used when assigning
/// over/under during assembly.
#[derive(Clone, Debug)]
pub struct PassLoc {
    pub seg: SegRef,
    /// Distance from the segment's start point along its direction.
    pub t: Rational,
}

#[derive(Clone)]
pub struct Diagram {
    pub surface: Arc<SurfacePresentation>,
    pub comps: Vec<CompPath>,
    pub crossings: Vec<Crossing>,
}

/// Gate layout along the top edge. Handle bands interleave (a⁻ b⁻ a⁺ b⁺ per
/// handle); planar bands sit side by side (r⁻ r⁺).
pub struct Layout {
    /// Per band: (minus-gate interval, plus-gate interval). A forward
    /// traversal goes up through the minus gate and down through the plus
    /// gate.
    pub gates: Vec<((Rational, Rational), (Rational, Rational))>,
    pub width: Rational,
    pub height: Rational,
    /// Right edge of the slot block holding the gates; the rectangle is
    /// padded beyond it.
    pub gate_span: Rational,
}

pub fn layout(surface: &SurfacePresentation) -> Layout {
    let g = surface.genus;
    let nb = surface.rank();
    // slot order: per handle a⁻ b⁻ a⁺ b⁺, then per planar band r⁻ r⁺
    let mut slot_of = vec![(0usize, 0usize); nb];
    let mut next = 0;
    for i in 0..g {
        let a = 2 * i;
        let b = 2 * i + 1;
        slot_of[a].0 = next;
        slot_of[b].0 = next + 1;
        slot_of[a].1 = next + 2;
        slot_of[b].1 = next + 3;
        next += 4;
    }
    for p in 2 * g..nb {
        slot_of[p] = (next, next + 1);
        next += 2;
    }
    let iv = |slot: usize| {
        (
            Rational::from_int(10 * slot as i64 + 2),
            Rational::from_int(10 * slot as i64 + 8),
        )
    };
    Layout {
        gates: slot_of.iter().map(|&(m, p)| (iv(m), iv(p))).collect(),
        width: Rational::from_int((10 * next).max(50) as i64),
        height: Rational::from_int(100),
        gate_span: Rational::from_int(10 * next as i64),
    }
}

impl Layout {
    /// Gate interval the strand goes up through when traversing `letter`.
    pub fn entry_gate(&self, l: Letter) -> (Rational, Rational) {
        let g = &self.gates[l.band as usize];
        if l.inv {
            g.1.clone()
        } else {
            g.0.clone()
        }
    }

    pub fn exit_gate(&self, l: Letter) -> (Rational, Rational) {
        let g = &self.gates[l.band as usize];
        if l.inv {
            g.0.clone()
        } else {
            g.1.clone()
        }
    }

    /// The module base point on the top edge, between the two gates of the
    /// last band (used by the annulus module).
    pub fn top_base_x(&self, band: u8) -> Rational {
        let g = &self.gates[band as usize];
        (g.0 .1.clone() + g.1 .0.clone()) * Rational::from_pair(1, 2)
    }
}

fn between(lo: &Rational, v: &Rational, hi: &Rational) -> bool {
    lo < v && v < hi
}

impl Diagram {
    pub fn empty(surface: Arc<SurfacePresentation>) -> Diagram {
        Diagram { surface, comps: Vec::new(), crossings: Vec::new() }
    }

    pub fn all_segments(&self) -> Vec<(SegRef, Seg)> {
        let mut out = Vec::new();
        for (ci, c) in self.comps.iter().enumerate() {
            for (si, s) in c.segments().into_iter().enumerate() {
                out.push((SegRef { comp: ci, seg: si }, s));
            }
        }
        out
    }

    /// Compute all transversal intersections and assign over/under with
    /// `over_rule(at, vertical_pass, horizontal_pass) -> vertical goes over`.
    /// Panics on degenerate geometry; operations must keep coordinates
    /// generic.
    pub fn assemble(
        surface: Arc<SurfacePresentation>,
        comps: Vec<CompPath>,
        over_rule: &dyn Fn(&Pt, &PassLoc, &PassLoc) -> bool,
    ) -> Diagram {
        let d = Diagram { surface, comps, crossings: Vec::new() };
        let segs = d.all_segments();
        let mut crossings = Vec::new();
        for i in 0..segs.len() {
            for j in (i + 1)..segs.len() {
                let (ri, si) = &segs[i];
                let (rj, sj) = &segs[j];
                let (v, vr, h, hr) = if si.dir().vertical() && !sj.dir().vertical() {
                    (si, *ri, sj, *rj)
                } else if !si.dir().vertical() && sj.dir().vertical() {
                    (sj, *rj, si, *ri)
                } else {
                    continue;
                };
                let (ylo, yhi) = v.y_range();
                let (xlo, xhi) = h.x_range();
                if between(&xlo, &v.a.x, &xhi) && between(&ylo, &h.a.y, &yhi) {
                    let at = Pt::new(v.a.x.clone(), h.a.y.clone());
                    let tv = match v.dir() {
                        Dir::N => at.y.sub_ref(&v.a.y),
                        _ => v.a.y.sub_ref(&at.y),
                    };
                    let th = match h.dir() {
                        Dir::E => at.x.sub_ref(&h.a.x),
                        _ => h.a.x.sub_ref(&at.x),
                    };
                    let pv = PassLoc { seg: vr, t: tv };
                    let ph = PassLoc { seg: hr, t: th };
                    let v_over = over_rule(&at, &pv, &ph);
                    let (over, under, od, ud) = if v_over {
                        (vr, hr, v.dir(), h.dir())
                    } else {
                        (hr, vr, h.dir(), v.dir())
                    };
                    let (ox, oy) = od.unit();
                    let (ux, uy) = ud.unit();
                    let sign = (ox * uy - oy * ux) as i8;
                    crossings.push(Crossing { at, over, under, sign });
                }
            }
        }
        crossings.sort_by(|a, b| (a.over, a.under).cmp(&(b.over, b.under)));
        let out = Diagram { crossings, ..d };
        out.validate();
        out
    }

    /// Point-indexed over/under: at each crossing point, does the vertical
    /// strand go over. Stable under surgeries that keep a crossing's point.
    pub fn over_map(&self) -> std::collections::HashMap<Pt, bool> {
        self.crossings
            .iter()
            .map(|c| (c.at.clone(), self.seg(c.over).dir().vertical()))
            .collect()
    }

    /// Structural sanity: rectilinear generic position, gates legal, band
    /// lanes order-reversing, crossing table matching geometry.
    pub fn validate(&self) {
        let lay = layout(&self.surface);
        let h = &lay.height;
        for c in &self.comps {
            let mut cur = c.start.clone();
            enum Item {
                D(Dir),
                J,
            }
            let mut items = Vec::new();
            for s in &c.steps {
                match s {
                    Step::Line(p) => {
                        assert!(
                            (p.x == cur.x) != (p.y == cur.y),
                            "segment must be axis-parallel and nonzero: {cur:?} -> {p:?}"
                        );
                        assert!(
                            p.x >= Rational::zero()
                                && p.x <= lay.width
                                && p.y >= Rational::zero()
                                && &p.y <= h,
                            "point outside the rectangle: {p:?}"
                        );
                        if p.y == cur.y {
                            assert!(
                                cur.y > Rational::zero() && &cur.y < h,
                                "horizontal segment on a boundary edge"
                            );
                        }
                        items.push(Item::D(Dir::of(&cur, p)));
                        cur = p.clone();
                    }
                    Step::Jump { letter, to } => {
                        let gi = lay.entry_gate(*letter);
                        let go = lay.exit_gate(*letter);
                        assert_eq!(&cur.y, h, "jump must start on the top edge");
                        assert_eq!(&to.y, h, "jump must land on the top edge");
                        assert!(between(&gi.0, &cur.x, &gi.1), "jump start outside its gate");
                        assert!(between(&go.0, &to.x, &go.1), "jump landing outside its gate");
                        items.push(Item::J);
                        cur = to.clone();
                    }
                }
            }
            if !c.open {
                assert_eq!(cur, c.start, "closed component must return to its start");
            } else {
                assert!(c.start.y == Rational::zero(), "arc must start on the bottom edge");
                assert!(&cur.y == h, "arc must end on the top edge");
            }
            let m = items.len();
            let pairs = if c.open { m.saturating_sub(1) } else { m };
            for k in 0..pairs {
                match (&items[k], &items[(k + 1) % m]) {
                    (Item::D(d1), Item::D(d2)) => assert!(
                        d1.vertical() != d2.vertical(),
                        "consecutive segments must be perpendicular"
                    ),
                    (Item::D(d), Item::J) => {
                        assert_eq!(*d, Dir::N, "gate approach must head up")
                    }
                    (Item::J, Item::D(d)) => {
                        assert_eq!(*d, Dir::S, "gate exit must head down")
                    }
                    (Item::J, Item::J) => panic!("adjacent jumps"),
                }
            }
        }
        // band lanes reverse order through the band
        for band in 0..self.surface.rank() as u8 {
            let mut lanes: Vec<(Rational, Rational)> = Vec::new();
            for c in &self.comps {
                let mut cur = c.start.clone();
                for s in &c.steps {
                    match s {
                        Step::Line(p) => cur = p.clone(),
                        Step::Jump { letter, to } => {
                            if letter.band == band {
                                // record (minus-gate x, plus-gate x)
                                if letter.inv {
                                    lanes.push((to.x.clone(), cur.x.clone()));
                                } else {
                                    lanes.push((cur.x.clone(), to.x.clone()));
                                }
                            }
                            cur = to.clone();
                        }
                    }
                }
            }
            lanes.sort_by(|a, b| a.0.cmp(&b.0));
            for w in lanes.windows(2) {
                assert!(w[0].0 < w[1].0, "coincident lanes in a gate");
                assert!(w[0].1 > w[1].1, "band lanes must reverse order");
            }
        }
        // generic position and crossing-table consistency
        let segs = self.all_segments();
        let mut pts: Vec<Pt> = Vec::new();
        for i in 0..segs.len() {
            for j in (i + 1)..segs.len() {
                let (ri, si) = &segs[i];
                let (rj, sj) = &segs[j];
                let conseq = ri.comp == rj.comp
                    && (ri.seg + 1 == rj.seg || rj.seg + 1 == ri.seg || {
                        let n = self.comps[ri.comp].segments().len();
                        !self.comps[ri.comp].open && ri.seg.min(rj.seg) == 0 && ri.seg.max(rj.seg) == n - 1
                    });
                if si.dir().vertical() == sj.dir().vertical() {
                    if si.dir().vertical() {
                        if si.a.x == sj.a.x {
                            let (l1, h1) = si.y_range();
                            let (l2, h2) = sj.y_range();
                            assert!(h1 < l2 || h2 < l1 || (conseq && (h1 == l2 || h2 == l1)),
                                "collinear vertical overlap at x={:?}", si.a.x);
                        }
                    } else if si.a.y == sj.a.y {
                        let (l1, h1) = si.x_range();
                        let (l2, h2) = sj.x_range();
                        assert!(h1 < l2 || h2 < l1 || (conseq && (h1 == l2 || h2 == l1)),
                            "collinear horizontal overlap at y={:?}", si.a.y);
                    }
                } else {
                    let (v, hh) = if si.dir().vertical() { (si, sj) } else { (sj, si) };
                    let (ylo, yhi) = v.y_range();
                    let (xlo, xhi) = hh.x_range();
                    let x_in = xlo <= v.a.x && v.a.x <= xhi;
                    let y_in = ylo <= hh.a.y && hh.a.y <= yhi;
                    if x_in && y_in {
                        let interior = between(&xlo, &v.a.x, &xhi) && between(&ylo, &hh.a.y, &yhi);
                        if !interior {
                            assert!(conseq, "T-intersection between non-consecutive segments");
                        } else {
                            pts.push(Pt::new(v.a.x.clone(), hh.a.y.clone()));
                        }
                    }
                }
            }
        }
        pts.sort_by(|a, b| (a.x.clone(), a.y.clone()).cmp(&(b.x.clone(), b.y.clone())));
        for w in pts.windows(2) {
            assert!(w[0] != w[1], "multiple crossings at one point");
        }
        assert_eq!(pts.len(), self.crossings.len(), "crossing table out of sync with geometry");
        for c in &self.crossings {
            let ov = self.seg(c.over);
            let un = self.seg(c.under);
            let (ox, oy) = ov.dir().unit();
            let (ux, uy) = un.dir().unit();
            assert_eq!(c.sign as i64, ox * uy - oy * ux, "stored sign mismatch");
            assert!(ov.dir().vertical() != un.dir().vertical());
        }
    }

    pub fn seg(&self, r: SegRef) -> Seg {
        self.comps[r.comp].segments()[r.seg].clone()
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign as i64).sum()
    }

    /// The longitude computation of the writhe: per component, the blackboard
    /// pushoff's meridian coefficients are the signed under-passes beneath
    /// each component (self-crossings contribute through their own under
    /// pass); their total must equal the crossing-sign sum.
    pub fn homological_writhe(&self) -> i64 {
        let n = self.comps.len();
        let mut coeff = vec![vec![0i64; n]; n];
        for c in &self.crossings {
            coeff[c.under.comp][c.over.comp] += c.sign as i64;
        }
        (0..n).map(|i| coeff[i].iter().sum::<i64>()).sum()
    }

    /// Forget coordinates: per component, the ordered list of gate and
    /// crossing events.
    pub fn extract_code(&self) -> Code {
        let mut per_seg: Vec<Vec<Vec<(Rational, usize, bool)>>> = self
            .comps
            .iter()
            .map(|c| vec![Vec::new(); c.segments().len()])
            .collect();
        for (id, c) in self.crossings.iter().enumerate() {
            for (r, over) in [(c.over, true), (c.under, false)] {
                let s = self.seg(r);
                let t = match s.dir() {
                    Dir::N => c.at.y.sub_ref(&s.a.y),
                    Dir::S => s.a.y.sub_ref(&c.at.y),
                    Dir::E => c.at.x.sub_ref(&s.a.x),
                    Dir::W => s.a.x.sub_ref(&c.at.x),
                };
                per_seg[r.comp][r.seg].push((t, id, over));
            }
        }
        let mut comps = Vec::new();
        for (ci, c) in self.comps.iter().enumerate() {
            for v in &mut per_seg[ci] {
                v.sort_by(|a, b| a.0.cmp(&b.0));
            }
            let mut events = Vec::new();
            let mut seg_idx = 0;
            for s in &c.steps {
                match s {
                    Step::Line(_) => {
                        for (_, id, over) in &per_seg[ci][seg_idx] {
                            events.push(Ev::Cross { id: *id, over: *over });
                        }
                        seg_idx += 1;
                    }
                    Step::Jump { letter, .. } => {
                        events.push(Ev::Gate(*letter));
                    }
                }
            }
            comps.push(CompCode { open: c.open, events });
        }
        let code = Code { comps, signs: self.crossings.iter().map(|c| c.sign).collect() };
        code.validate();
        code
    }

    /// Coordinates owned by the strands alone.
    fn strand_coordinate_values(&self) -> (BTreeSet<Rational>, BTreeSet<Rational>) {
        let mut xs = BTreeSet::new();
        let mut ys = BTreeSet::new();
        for c in &self.comps {
            let mut push = |p: &Pt| {
                xs.insert(p.x.clone());
                ys.insert(p.y.clone());
            };
            push(&c.start);
            for s in &c.steps {
                match s {
                    Step::Line(p) => push(p),
                    Step::Jump { to, .. } => push(to),
                }
            }
        }
        (xs, ys)
    }

    /// Strand coordinates plus the fixed features (frame and gate edges)
    /// that surgeries must also keep clear of.
    fn coordinate_values(&self) -> (BTreeSet<Rational>, BTreeSet<Rational>) {
        let (mut xs, mut ys) = self.strand_coordinate_values();
        let lay = layout(&self.surface);
        for g in &lay.gates {
            xs.insert(g.0 .0.clone());
            xs.insert(g.0 .1.clone());
            xs.insert(g.1 .0.clone());
            xs.insert(g.1 .1.clone());
        }
        xs.insert(Rational::zero());
        xs.insert(lay.width.clone());
        ys.insert(Rational::zero());
        ys.insert(lay.height.clone());
        (xs, ys)
    }

    /// Whole-diagram parallel pushoff at perpendicular distance eps on the
    /// left of each strand. Carries the crossing table (segment indices are
    /// stable). Closed components only.
    pub fn pushed_off(&self, eps: &Rational) -> Diagram {
        let comps: Vec<CompPath> = self.comps.iter().map(|c| offset_comp(c, eps)).collect();
        let old = self.crossings.clone();
        let rule = move |_: &Pt, v: &PassLoc, h: &PassLoc| -> bool {
            for c in &old {
                if c.over == v.seg && c.under == h.seg {
                    return true;
                }
                if c.over == h.seg && c.under == v.seg {
                    return false;
                }
            }
            unreachable!("pushoff created a crossing with no precedent")
        };
        Diagram::assemble(self.surface.clone(), comps, &rule)
    }

    /// Minimal positive gap between parallel features, used to size local
    /// surgeries.
    pub fn min_gap(&self) -> Rational {
        let (xs, ys) = self.coordinate_values();
        let mut best: Option<Rational> = None;
        for set in [&xs, &ys] {
            let v: Vec<&Rational> = set.iter().collect();
            for w in v.windows(2) {
                let g = w[1].sub_ref(w[0]);
                if best.as_ref().is_none_or(|b| &g < b) {
                    best = Some(g);
                }
            }
        }
        best.unwrap_or_else(Rational::one)
    }

    /// An eps such that offsetting `other` by it cannot create coincidences
    /// with `self` or degenerate `other`.
    pub fn fresh_eps(&self, other: &Diagram) -> Rational {
        let (x1, y1) = self.coordinate_values();
        let (x2, y2) = other.coordinate_values();
        let mut vals: Vec<Rational> = Vec::new();
        vals.extend(x1.iter().cloned());
        vals.extend(x2.iter().cloned());
        let mut yvals: Vec<Rational> = Vec::new();
        yvals.extend(y1.iter().cloned());
        yvals.extend(y2.iter().cloned());
        let mut gaps: Vec<Rational> = Vec::new();
        for vs in [&mut vals, &mut yvals] {
            vs.sort();
            vs.dedup();
            for w in vs.windows(2) {
                gaps.push(w[1].sub_ref(&w[0]));
            }
        }
        let mut eps = gaps.iter().min().cloned().unwrap_or_else(Rational::one)
            * Rational::from_pair(1, 3);
        // avoid |v - w| collisions exactly
        let mut bad: BTreeSet<Rational> = BTreeSet::new();
        for vs in [&vals, &yvals] {
            for a in vs {
                for b in vs {
                    let d = a.sub_ref(b);
                    if d > Rational::zero() {
                        bad.insert(d);
                    }
                }
            }
        }
        while bad.contains(&eps) {
            eps = eps * Rational::from_pair(1, 2);
        }
        eps
    }

    /// True when any strand point of `self` reuses a coordinate of a strand
    /// point of `other`. The shared frame and gate values do not count.
    pub fn shares_coordinates(&self, other: &Diagram) -> bool {
        let (x1, y1) = self.strand_coordinate_values();
        let (x2, y2) = other.strand_coordinate_values();
        x1.intersection(&x2).next().is_some() || y1.intersection(&y2).next().is_some()
    }

    pub fn to_json(&self) -> Value {
        let pt = |p: &Pt| json!([p.x.to_string(), p.y.to_string()]);
        json!({
            "surface": {"genus": self.surface.genus, "boundaries": self.surface.boundaries},
            "comps": self.comps.iter().map(|c| json!({
                "open": c.open,
                "start": pt(&c.start),
                "steps": c.steps.iter().map(|s| match s {
                    Step::Line(p) => json!({"line": pt(p)}),
                    Step::Jump { letter, to } => json!({
                        "jump": {
                            "letter": format!("{}{}", self.surface.band_name(letter.band), if letter.inv {"^-1"} else {""}),
                            "to": pt(to),
                        }
                    }),
                }).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "crossings": self.crossings.iter().map(|c| json!({
                "at": pt(&c.at),
                "over": [c.over.comp, c.over.seg],
                "under": [c.under.comp, c.under.seg],
                "sign": c.sign,
            })).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Diagram, String> {
        let err = |m: &str| format!("diagram JSON: {m}");
        let surf = v.get("surface").ok_or_else(|| err("missing surface"))?;
        let genus = surf["genus"].as_u64().ok_or_else(|| err("genus"))? as usize;
        let boundaries = surf["boundaries"].as_u64().ok_or_else(|| err("boundaries"))? as usize;
        let surface = SurfacePresentation::new(genus, boundaries);
        let pt = |p: &Value| -> Result<Pt, String> {
            let a = p.as_array().ok_or_else(|| err("point"))?;
            Ok(Pt::new(
                a[0].as_str().ok_or_else(|| err("coord"))?.parse()?,
                a[1].as_str().ok_or_else(|| err("coord"))?.parse()?,
            ))
        };
        let mut comps = Vec::new();
        for c in v["comps"].as_array().ok_or_else(|| err("comps"))? {
            let mut steps = Vec::new();
            for s in c["steps"].as_array().ok_or_else(|| err("steps"))? {
                if let Some(l) = s.get("line") {
                    steps.push(Step::Line(pt(l)?));
                } else if let Some(j) = s.get("jump") {
                    let name = j["letter"].as_str().ok_or_else(|| err("letter"))?;
                    steps.push(Step::Jump { letter: surface.letter(name), to: pt(&j["to"])? });
                } else {
                    return Err(err("unknown step"));
                }
            }
            comps.push(CompPath {
                start: pt(&c["start"])?,
                steps,
                open: c["open"].as_bool().unwrap_or(false),
            });
        }
        let mut crossings = Vec::new();
        for c in v["crossings"].as_array().ok_or_else(|| err("crossings"))? {
            let r = |k: &str| -> Result<SegRef, String> {
                let a = c[k].as_array().ok_or_else(|| err("segref"))?;
                Ok(SegRef {
                    comp: a[0].as_u64().ok_or_else(|| err("segref"))? as usize,
                    seg: a[1].as_u64().ok_or_else(|| err("segref"))? as usize,
                })
            };
            crossings.push(Crossing {
                at: pt(&c["at"])?,
                over: r("over")?,
                under: r("under")?,
                sign: c["sign"].as_i64().ok_or_else(|| err("sign"))? as i8,
            });
        }
        let d = Diagram { surface, comps, crossings };
        d.validate();
        Ok(d)
    }
}

/// Merge consecutive collinear segments produced by splicing. Leaves jumps
/// untouched; the wrap-around pair of a closed path is merged by rotating the
/// start onto the previous vertex.
pub fn normalize_path(c: &CompPath) -> CompPath {
    let mut start = c.start.clone();
    let mut steps: Vec<Step> = Vec::new();
    let mut cur = c.start.clone();
    for s in &c.steps {
        match s {
            Step::Line(p) => {
                if *p == cur {
                    continue;
                }
                let d = Dir::of(&cur, p);
                let merge = if let Some(Step::Line(q)) = steps.last() {
                    let before = if steps.len() >= 2 {
                        match &steps[steps.len() - 2] {
                            Step::Line(r) => r.clone(),
                            Step::Jump { to, .. } => to.clone(),
                        }
                    } else {
                        start.clone()
                    };
                    Dir::of(&before, q) == d
                } else {
                    false
                };
                if merge {
                    *steps.last_mut().unwrap() = Step::Line(p.clone());
                } else {
                    steps.push(Step::Line(p.clone()));
                }
                cur = p.clone();
            }
            Step::Jump { letter, to } => {
                steps.push(Step::Jump { letter: *letter, to: to.clone() });
                cur = to.clone();
            }
        }
    }
    if !c.open {
        // merge across the seam: while the first and last steps are collinear
        // lines through the start point, rotate the start backwards
        loop {
            let n = steps.len();
            if n < 2 {
                break;
            }
            let (first_line, last_line) = match (&steps[0], &steps[n - 1]) {
                (Step::Line(p), Step::Line(_)) => {
                    let before_last = match &steps[n - 2] {
                        Step::Line(r) => r.clone(),
                        Step::Jump { to, .. } => to.clone(),
                    };
                    (p.clone(), before_last)
                }
                _ => break,
            };
            if first_line == start {
                break;
            }
            let d_in = Dir::of(&last_line, &start);
            let d_out = Dir::of(&start, &first_line);
            if d_in == d_out {
                // drop the final vertex, extend the last segment to first_line
                steps[n - 1] = Step::Line(first_line.clone());
                start = match &steps[0] {
                    Step::Line(p) => p.clone(),
                    _ => unreachable!(),
                };
                steps.remove(0);
            } else {
                break;
            }
        }
    }
    CompPath { start, steps, open: c.open }
}

/// Left-normal offset of a whole component (corner-joined), preserving step
/// structure and segment indices. Gate points shift with their vertical
/// approach segment, which reverses lane order inside each gate exactly as a
/// band traversal requires.
fn offset_comp(c: &CompPath, eps: &Rational) -> CompPath {
    assert!(!c.open, "cannot push off an open arc");
    let m = c.steps.len();
    let segs = c.segments();
    let n = segs.len();
    assert!(n > 0, "cannot push off a degenerate component");
    let top = segs
        .iter()
        .flat_map(|s| [s.a.y.clone(), s.b.y.clone()])
        .max()
        .unwrap();
    let shifted: Vec<Seg> = segs
        .iter()
        .map(|s| {
            let (dx, dy) = s.dir().left().unit();
            let sh = |p: &Pt| {
                Pt::new(
                    p.x.add_ref(&(Rational::from_int(dx) * eps.clone())),
                    p.y.add_ref(&(Rational::from_int(dy) * eps.clone())),
                )
            };
            Seg { a: sh(&s.a), b: sh(&s.b) }
        })
        .collect();
    // seg index of each Line step
    let mut seg_of_step = vec![usize::MAX; m];
    {
        let mut si = 0;
        for (k, s) in c.steps.iter().enumerate() {
            if matches!(s, Step::Line(_)) {
                seg_of_step[k] = si;
                si += 1;
            }
        }
    }
    // point k sits before step k; its new position comes from the lines of
    // the incoming and outgoing steps around it
    let new_point = |k: usize| -> Pt {
        let in_step = &c.steps[(k + m - 1) % m];
        let out_step = &c.steps[k % m];
        match (in_step, out_step) {
            (Step::Line(_), Step::Line(_)) => {
                let si = seg_of_step[(k + m - 1) % m];
                let sj = seg_of_step[k % m];
                let (v, h) = if shifted[si].dir().vertical() {
                    (&shifted[si], &shifted[sj])
                } else {
                    (&shifted[sj], &shifted[si])
                };
                Pt::new(v.a.x.clone(), h.a.y.clone())
            }
            (Step::Line(_), Step::Jump { .. }) => {
                let si = seg_of_step[(k + m - 1) % m];
                assert!(shifted[si].dir().vertical(), "gate approach must be vertical");
                Pt::new(shifted[si].a.x.clone(), top.clone())
            }
            (Step::Jump { .. }, Step::Line(_)) => {
                let sj = seg_of_step[k % m];
                assert!(shifted[sj].dir().vertical(), "gate exit must be vertical");
                Pt::new(shifted[sj].a.x.clone(), top.clone())
            }
            (Step::Jump { .. }, Step::Jump { .. }) => {
                unreachable!("adjacent jumps cannot occur: gates are disjoint")
            }
        }
    };
    let start = new_point(0);
    let steps = c
        .steps
        .iter()
        .enumerate()
        .map(|(k, s)| match s {
            Step::Line(_) => Step::Line(new_point(k + 1)),
            Step::Jump { letter, .. } => Step::Jump { letter: *letter, to: new_point(k + 1) },
        })
        .collect();
    CompPath { start, steps, open: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect_loop() -> CompPath {
        // counterclockwise rectangle
        CompPath {
            start: Pt::of(30, 30),
            steps: vec![
                Step::Line(Pt::of(40, 30)),
                Step::Line(Pt::of(40, 40)),
                Step::Line(Pt::of(30, 40)),
                Step::Line(Pt::of(30, 30)),
            ],
            open: false,
        }
    }

    #[test]
    fn assemble_empty_circle() {
        let s = SurfacePresentation::disk();
        let d = Diagram::assemble(s, vec![rect_loop()], &|_, _, _| true);
        assert!(d.crossings.is_empty());
        assert_eq!(d.writhe(), 0);
        assert_eq!(d.homological_writhe(), 0);
        let code = d.extract_code();
        assert_eq!(code.comps.len(), 1);
        assert_eq!(code.comps[0].events.len(), 0);
    }

    #[test]
    fn corner_overlapping_rectangles_cross_twice() {
        let s = SurfacePresentation::disk();
        let a = rect_loop();
        let b = CompPath {
            start: Pt::of(35, 25),
            steps: vec![
                Step::Line(Pt::of(45, 25)),
                Step::Line(Pt::of(45, 35)),
                Step::Line(Pt::of(35, 35)),
                Step::Line(Pt::of(35, 25)),
            ],
            open: false,
        };
        // first component always over
        let d = Diagram::assemble(s, vec![a, b], &|_, v, _| v.seg.comp == 0);
        assert_eq!(d.crossings.len(), 2);
        assert_eq!(d.writhe(), d.homological_writhe());
        // unlinked overlay: the two signs cancel
        assert_eq!(d.writhe(), 0);
        let code = d.extract_code();
        assert_eq!(code.comps.len(), 2);
        assert_eq!(code.comps[0].cross_count(), 2);
    }

    #[test]
    fn pushoff_keeps_structure() {
        let s = SurfacePresentation::disk();
        let d = Diagram::assemble(s, vec![rect_loop()], &|_, _, _| true);
        let e = d.pushed_off(&Rational::from_pair(1, 4));
        assert!(e.crossings.is_empty());
        e.validate();
        assert!(d.shares_coordinates(&d));
        assert!(!d.shares_coordinates(&e));
    }

    #[test]
    fn json_roundtrip() {
        let s = SurfacePresentation::disk();
        let d = Diagram::assemble(s, vec![rect_loop()], &|_, _, _| true);
        let v = d.to_json();
        let d2 = Diagram::from_json(&v).unwrap();
        assert_eq!(d2.to_json(), v);
    }
}
