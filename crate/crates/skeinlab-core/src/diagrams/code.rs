//! Combinatorial traversal codes of tangle diagrams.
//!
//! A code records, per component, the cyclic sequence of band-gate traversals
//! and crossing passes, plus per-crossing signs. Coordinates are forgotten.
//! The skein reducer works entirely on codes: switching and smoothing are
//! sequence surgeries here, and the memo key is the canonical form.

use crate::surface::{cyclic_reduce, CyclicWord, Letter, Word};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Ev {
    Gate(Letter),
    Cross { id: usize, over: bool },
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CompCode {
    /// Open components (arcs) have a linear event sequence; closed ones are
    /// cyclic.
    pub open: bool,
    pub events: Vec<Ev>,
}

impl CompCode {
    fn rotated(&self, r: usize) -> Vec<Ev> {
        assert!(!self.open);
        let n = self.events.len();
        (0..n).map(|i| self.events[(i + r) % n]).collect()
    }

    /// Gate word along the component, in event order.
    pub fn gate_word(&self) -> Word {
        Word(
            self.events
                .iter()
                .filter_map(|e| match e {
                    Ev::Gate(l) => Some(*l),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn cross_count(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Ev::Cross { .. })).count()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Code {
    pub comps: Vec<CompCode>,
    /// Crossing signs, indexed by crossing id.
    pub signs: Vec<i8>,
}

/// Blind encoding of one rotation: gates plus crossing-incidence pattern with
/// ids relabelled by first appearance. Over/under and signs are excluded, so
/// the encoding is stable under crossing switches.
fn blind_string(events: &[Ev]) -> Vec<i32> {
    let mut relabel: Vec<(usize, i32)> = Vec::new();
    let mut out = Vec::with_capacity(events.len() * 2);
    for e in events {
        match e {
            Ev::Gate(l) => {
                out.push(-1 - (l.band as i32) * 2 - if l.inv { 1 } else { 0 });
            }
            Ev::Cross { id, .. } => {
                let lbl = match relabel.iter().find(|(i, _)| i == id) {
                    Some((_, l)) => *l,
                    None => {
                        let l = relabel.len() as i32;
                        relabel.push((*id, l));
                        l
                    }
                };
                out.push(lbl);
            }
        }
    }
    out
}

impl Code {
    pub fn cross_total(&self) -> usize {
        self.signs.len()
    }

    /// Per component: the conjugacy class of its gate word (closed comps).
    pub fn comp_class(&self, ci: usize) -> CyclicWord {
        assert!(!self.comps[ci].open);
        cyclic_reduce(&self.comps[ci].gate_word())
    }

    /// Reduced linear word of the arc component.
    pub fn arc_word(&self, ci: usize) -> Word {
        assert!(self.comps[ci].open);
        self.comps[ci].gate_word().reduce()
    }

    pub fn self_writhe(&self, ci: usize) -> i64 {
        let mut seen = vec![0u8; self.signs.len()];
        for e in &self.comps[ci].events {
            if let Ev::Cross { id, .. } = e {
                seen[*id] += 1;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &c)| c == 2)
            .map(|(id, _)| self.signs[id] as i64)
            .sum()
    }

    pub fn writhe(&self) -> i64 {
        self.signs.iter().map(|&s| s as i64).sum()
    }

    /// Pick the reduction traversal: closed components sorted by (class order,
    /// blind string), arc last, each closed component rotated to its blind
    /// minimum. Stable under crossing switches because the keys ignore
    /// over/under and signs.
    pub fn fix_traversal(&self) -> Code {
        let mut order: Vec<usize> = (0..self.comps.len()).collect();
        let mut keys: Vec<(bool, CyclicWord, Vec<i32>, usize)> = Vec::new();
        let mut rotations: Vec<usize> = vec![0; self.comps.len()];
        for ci in 0..self.comps.len() {
            if self.comps[ci].open {
                keys.push((true, CyclicWord::default(), Vec::new(), ci));
                continue;
            }
            let n = self.comps[ci].events.len();
            let mut best_rot = 0;
            let mut best: Option<Vec<i32>> = None;
            for r in 0..n.max(1) {
                let s = blind_string(&self.comps[ci].rotated(r));
                if best.as_ref().is_none_or(|b| s < *b) {
                    best = Some(s);
                    best_rot = r;
                }
            }
            rotations[ci] = best_rot;
            keys.push((false, self.comp_class(ci), best.unwrap_or_default(), ci));
        }
        order.sort_by(|&a, &b| {
            let ka = &keys[a];
            let kb = &keys[b];
            ka.0.cmp(&kb.0)
                .then_with(|| ka.1.cmp_order(&kb.1))
                .then_with(|| ka.2.cmp(&kb.2))
                .then_with(|| ka.3.cmp(&kb.3))
        });
        let comps = order
            .iter()
            .map(|&ci| {
                if self.comps[ci].open {
                    self.comps[ci].clone()
                } else {
                    CompCode { open: false, events: self.comps[ci].rotated(rotations[ci]) }
                }
            })
            .collect();
        Code { comps, signs: self.signs.clone() }
    }

    /// Memo key: the fixed traversal serialized with full crossing data,
    /// crossing ids relabelled by first appearance.
    pub fn canonical_key(&self) -> Vec<i32> {
        let fixed = self.fix_traversal();
        let mut relabel: Vec<(usize, i32)> = Vec::new();
        let mut out = Vec::new();
        for c in &fixed.comps {
            out.push(if c.open { i32::MIN + 1 } else { i32::MIN });
            for e in &c.events {
                match e {
                    Ev::Gate(l) => {
                        out.push(-1 - (l.band as i32) * 2 - if l.inv { 1 } else { 0 });
                    }
                    Ev::Cross { id, over } => {
                        let lbl = match relabel.iter().find(|(i, _)| i == id) {
                            Some((_, l)) => *l,
                            None => {
                                let l = relabel.len() as i32;
                                relabel.push((*id, l));
                                l
                            }
                        };
                        out.push(lbl * 4 + if *over { 1 } else { 0 } + if fixed.signs[*id] > 0 { 2 } else { 0 });
                    }
                }
            }
        }
        out
    }

    /// First crossing pass that violates the descending condition along the
    /// fixed traversal (assumes self == fix_traversal output).
    pub fn first_bad(&self) -> Option<usize> {
        let mut seen = vec![false; self.signs.len()];
        for c in &self.comps {
            for e in &c.events {
                if let Ev::Cross { id, over } = e {
                    if !seen[*id] {
                        seen[*id] = true;
                        if !*over {
                            return Some(*id);
                        }
                    }
                }
            }
        }
        None
    }

    pub fn switch(&self, id: usize) -> Code {
        let mut out = self.clone();
        out.signs[id] = -out.signs[id];
        for c in &mut out.comps {
            for e in &mut c.events {
                if let Ev::Cross { id: i, over } = e {
                    if *i == id {
                        *over = !*over;
                    }
                }
            }
        }
        out
    }

    fn passes_of(&self, id: usize) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for (ci, c) in self.comps.iter().enumerate() {
            for (ei, e) in c.events.iter().enumerate() {
                if matches!(e, Ev::Cross { id: i, .. } if *i == id) {
                    v.push((ci, ei));
                }
            }
        }
        v
    }

    /// Oriented smoothing at crossing id: both passes removed, strands
    /// re-spliced head-to-tail. A self-crossing splits its component; a
    /// crossing between two components merges them. Crossing ids compacted.
    pub fn smooth(&self, id: usize) -> Code {
        let passes = self.passes_of(id);
        assert_eq!(passes.len(), 2, "crossing id {id} not present twice");
        let (c1, e1) = passes[0];
        let (c2, e2) = passes[1];
        let mut comps: Vec<CompCode> = Vec::new();
        if c1 == c2 {
            let comp = &self.comps[c1];
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let mid: Vec<Ev> = comp.events[lo + 1..hi].to_vec();
            if comp.open {
                // the piece between the passes closes into a loop; the rest
                // stays an arc
                let mut rest: Vec<Ev> = comp.events[..lo].to_vec();
                rest.extend_from_slice(&comp.events[hi + 1..]);
                for (ci, c) in self.comps.iter().enumerate() {
                    if ci == c1 {
                        comps.push(CompCode { open: true, events: rest.clone() });
                        comps.push(CompCode { open: false, events: mid.clone() });
                    } else {
                        comps.push(c.clone());
                    }
                }
            } else {
                let mut rest: Vec<Ev> = comp.events[hi + 1..].to_vec();
                rest.extend_from_slice(&comp.events[..lo]);
                for (ci, c) in self.comps.iter().enumerate() {
                    if ci == c1 {
                        comps.push(CompCode { open: false, events: mid.clone() });
                        comps.push(CompCode { open: false, events: rest.clone() });
                    } else {
                        comps.push(c.clone());
                    }
                }
            }
        } else {
            // merge: at the crossing, the outgoing side of one strand
            // continues into the outgoing side of the other
            let (ca, ea, cb, eb) = (c1, e1, c2, e2);
            let a = &self.comps[ca];
            let b = &self.comps[cb];
            let merged: CompCode = if b.open {
                // splice the closed a into the arc b
                assert!(!a.open, "cannot smooth two arcs together");
                let mut ev: Vec<Ev> = b.events[..eb].to_vec();
                for k in 1..a.events.len() {
                    ev.push(a.events[(ea + k) % a.events.len()]);
                }
                ev.extend_from_slice(&b.events[eb + 1..]);
                CompCode { open: true, events: ev }
            } else if a.open {
                let mut ev: Vec<Ev> = a.events[..ea].to_vec();
                for k in 1..b.events.len() {
                    ev.push(b.events[(eb + k) % b.events.len()]);
                }
                ev.extend_from_slice(&a.events[ea + 1..]);
                CompCode { open: true, events: ev }
            } else {
                let mut ev: Vec<Ev> = Vec::new();
                for k in 1..a.events.len() {
                    ev.push(a.events[(ea + k) % a.events.len()]);
                }
                for k in 1..b.events.len() {
                    ev.push(b.events[(eb + k) % b.events.len()]);
                }
                CompCode { open: false, events: ev }
            };
            for (ci, c) in self.comps.iter().enumerate() {
                if ci == ca {
                    comps.push(merged.clone());
                } else if ci != cb {
                    comps.push(c.clone());
                }
            }
        }
        Code { comps, signs: self.signs.clone() }.compact(&[id])
    }

    /// Drop the listed crossing ids (whose events are already gone) and
    /// renumber the rest.
    fn compact(&self, dropped: &[usize]) -> Code {
        let mut map = vec![usize::MAX; self.signs.len()];
        let mut signs = Vec::new();
        for id in 0..self.signs.len() {
            if !dropped.contains(&id) {
                map[id] = signs.len();
                signs.push(self.signs[id]);
            }
        }
        let comps = self
            .comps
            .iter()
            .map(|c| CompCode {
                open: c.open,
                events: c
                    .events
                    .iter()
                    .map(|e| match e {
                        Ev::Gate(l) => Ev::Gate(*l),
                        Ev::Cross { id, over } => {
                            assert_ne!(map[*id], usize::MAX, "dangling crossing id");
                            Ev::Cross { id: map[*id], over: *over }
                        }
                    })
                    .collect(),
            })
            .collect();
        Code { comps, signs }
    }

    fn adjacent_pairs(c: &CompCode) -> Vec<(usize, usize)> {
        let n = c.events.len();
        if n < 2 {
            return Vec::new();
        }
        let last = if c.open { n - 1 } else { n };
        (0..last).map(|i| (i, (i + 1) % n)).collect()
    }

    /// One pass of cleanup: kink removal (framing factor recorded as a signed
    /// kink count), bigon removal, and trivial-circle removal (recorded as a
    /// count of unknot factors). Returns None if nothing changed.
    fn cleanup_step(&self) -> Option<(Code, i64, usize)> {
        // kinks: the two passes of one crossing adjacent along a strand
        for (ci, c) in self.comps.iter().enumerate() {
            for (i, j) in Self::adjacent_pairs(c) {
                if let (Ev::Cross { id: a, .. }, Ev::Cross { id: b, .. }) = (c.events[i], c.events[j]) {
                    if a == b {
                        let mut comps = self.comps.clone();
                        let mut ev = c.events.clone();
                        if j > i {
                            ev.remove(j);
                            ev.remove(i);
                        } else {
                            ev.remove(i);
                            ev.remove(j);
                        }
                        comps[ci] = CompCode { open: c.open, events: ev };
                        let code = Code { comps, signs: self.signs.clone() }.compact(&[a]);
                        return Some((code, self.signs[a] as i64, 0));
                    }
                }
            }
        }
        // bigons: two crossings adjacent on both strands, one strand over at
        // both, opposite signs
        let mut adj: Vec<((usize, usize), (usize, usize, bool), (usize, usize, bool))> = Vec::new();
        for (ci, c) in self.comps.iter().enumerate() {
            for (i, j) in Self::adjacent_pairs(c) {
                if let (Ev::Cross { id: a, over: oa }, Ev::Cross { id: b, over: ob }) = (c.events[i], c.events[j]) {
                    if a != b {
                        let key = if a < b { (a, b) } else { (b, a) };
                        adj.push((key, (ci, i, oa), (ci, j, ob)));
                    }
                }
            }
        }
        for x in 0..adj.len() {
            for y in (x + 1)..adj.len() {
                if adj[x].0 != adj[y].0 {
                    continue;
                }
                let (a, b) = adj[x].0;
                // all four passes must be covered by the two adjacencies
                let evs = [adj[x].1, adj[x].2, adj[y].1, adj[y].2];
                let mut uniq: Vec<(usize, usize)> = evs.iter().map(|&(c, e, _)| (c, e)).collect();
                uniq.sort_unstable();
                uniq.dedup();
                if uniq.len() != 4 {
                    continue;
                }
                let strand1_over = adj[x].1 .2;
                if adj[x].2 .2 != strand1_over || adj[y].1 .2 == strand1_over || adj[y].2 .2 == strand1_over {
                    continue;
                }
                if self.signs[a] + self.signs[b] != 0 {
                    continue;
                }
                let mut comps = self.comps.clone();
                let mut by_comp: Vec<(usize, usize)> = uniq;
                by_comp.sort_by(|p, q| p.0.cmp(&q.0).then(q.1.cmp(&p.1)));
                for (ci, ei) in by_comp {
                    let mut ev = comps[ci].events.clone();
                    ev.remove(ei);
                    comps[ci] = CompCode { open: comps[ci].open, events: ev };
                }
                let code = Code { comps, signs: self.signs.clone() }.compact(&[a, b]);
                return Some((code, 0, 0));
            }
        }
        // trivial circles: closed, no crossings, freely trivial gate word
        for (ci, c) in self.comps.iter().enumerate() {
            if !c.open && c.cross_count() == 0 && cyclic_reduce(&c.gate_word()).is_empty() {
                let mut comps = self.comps.clone();
                comps.remove(ci);
                return Some((Code { comps, signs: self.signs.clone() }, 0, 1));
            }
        }
        None
    }

    /// Full cleanup. Returns (code, net kink sign sum, unknot factors).
    pub fn cleanup(&self) -> (Code, i64, usize) {
        let mut code = self.clone();
        let mut kinks = 0i64;
        let mut circles = 0usize;
        while let Some((next, k, c)) = code.cleanup_step() {
            code = next;
            kinks += k;
            circles += c;
        }
        (code, kinks, circles)
    }

    pub fn validate(&self) {
        let mut count = vec![(0usize, 0usize); self.signs.len()];
        for c in &self.comps {
            for e in &c.events {
                if let Ev::Cross { id, over } = e {
                    assert!(*id < self.signs.len(), "crossing id out of range");
                    if *over {
                        count[*id].0 += 1;
                    } else {
                        count[*id].1 += 1;
                    }
                }
            }
        }
        for (id, &(o, u)) in count.iter().enumerate() {
            assert_eq!((o, u), (1, 1), "crossing {id} must have one over and one under pass");
            assert!(self.signs[id] == 1 || self.signs[id] == -1, "sign must be ±1");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfacePresentation;

    fn l(s: &SurfacePresentation, name: &str) -> Ev {
        Ev::Gate(s.letter(name))
    }

    /// Positive kink on the annulus core.
    fn kinked_core(s: &SurfacePresentation) -> Code {
        Code {
            comps: vec![CompCode {
                open: false,
                events: vec![
                    l(s, "r1"),
                    Ev::Cross { id: 0, over: true },
                    Ev::Cross { id: 0, over: false },
                ],
            }],
            signs: vec![1],
        }
    }

    #[test]
    fn kink_cleanup() {
        let s = SurfacePresentation::annulus();
        let code = kinked_core(&s);
        code.validate();
        assert_eq!(code.writhe(), 1);
        assert_eq!(code.self_writhe(0), 1);
        let (clean, kinks, circles) = code.cleanup();
        assert_eq!(kinks, 1);
        assert_eq!(circles, 0);
        assert_eq!(clean.cross_total(), 0);
        assert_eq!(clean.comp_class(0), cyclic_reduce(&s.parse_word("r1")));
    }

    #[test]
    fn trivial_circle_cleanup() {
        let code = Code {
            comps: vec![CompCode { open: false, events: vec![] }],
            signs: vec![],
        };
        let (clean, _, circles) = code.cleanup();
        assert_eq!(circles, 1);
        assert!(clean.comps.is_empty());
    }

    #[test]
    fn bigon_cleanup() {
        // two parallel strands of one 2-winding component crossing twice with
        // opposite signs, over strand consistent: removable
        let s = SurfacePresentation::annulus();
        let code = Code {
            comps: vec![CompCode {
                open: false,
                events: vec![
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: true },
                    Ev::Cross { id: 1, over: true },
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: false },
                    Ev::Cross { id: 1, over: false },
                ],
            }],
            signs: vec![1, -1],
        };
        code.validate();
        let (clean, kinks, _) = code.cleanup();
        assert_eq!(kinks, 0);
        assert_eq!(clean.cross_total(), 0);
        assert_eq!(clean.comp_class(0).len(), 2);
    }

    #[test]
    fn clasp_not_removed() {
        // same-sign double crossing is not a bigon
        let s = SurfacePresentation::annulus();
        let code = Code {
            comps: vec![CompCode {
                open: false,
                events: vec![
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: true },
                    Ev::Cross { id: 1, over: true },
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: false },
                    Ev::Cross { id: 1, over: false },
                ],
            }],
            signs: vec![1, 1],
        };
        let (clean, _, _) = code.cleanup();
        assert_eq!(clean.cross_total(), 2);
    }

    #[test]
    fn smooth_self_crossing_splits() {
        // 2-winding knot with one self-crossing: smoothing gives two
        // winding-1 components
        let s = SurfacePresentation::annulus();
        let code = Code {
            comps: vec![CompCode {
                open: false,
                events: vec![
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: true },
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: false },
                ],
            }],
            signs: vec![1],
        };
        let sm = code.smooth(0);
        assert_eq!(sm.comps.len(), 2);
        for ci in 0..2 {
            assert_eq!(sm.comp_class(ci), cyclic_reduce(&s.parse_word("r1")));
        }
    }

    #[test]
    fn smooth_link_crossing_merges() {
        let s = SurfacePresentation::annulus();
        let code = Code {
            comps: vec![
                CompCode {
                    open: false,
                    events: vec![l(&s, "r1"), Ev::Cross { id: 0, over: true }],
                },
                CompCode {
                    open: false,
                    events: vec![l(&s, "r1"), Ev::Cross { id: 0, over: false }],
                },
            ],
            signs: vec![1],
        };
        let sm = code.smooth(0);
        assert_eq!(sm.comps.len(), 1);
        assert_eq!(sm.comp_class(0).len(), 2);
    }

    #[test]
    fn switch_flips_sign_and_descent() {
        let s = SurfacePresentation::annulus();
        let code = Code {
            comps: vec![CompCode {
                open: false,
                events: vec![
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: false },
                    l(&s, "r1"),
                    Ev::Cross { id: 0, over: true },
                ],
            }],
            signs: vec![1],
        };
        let fixed = code.fix_traversal();
        assert!(fixed.first_bad().is_some());
        let sw = fixed.switch(0);
        assert_eq!(sw.signs[0], -1);
        assert!(sw.fix_traversal().first_bad().is_none());
    }

    #[test]
    fn canonical_key_rotation_invariant() {
        let s = SurfacePresentation::annulus();
        let code = kinked_core(&s);
        let mut rot = code.clone();
        rot.comps[0].events.rotate_left(1);
        assert_eq!(code.canonical_key(), rot.canonical_key());
        // switching changes the key
        assert_ne!(code.canonical_key(), code.switch(0).canonical_key());
    }

    #[test]
    fn arc_smoothing() {
        // arc crossing a loop once: smoothing merges loop into arc
        let s = SurfacePresentation::annulus();
        let code = Code {
            comps: vec![
                CompCode {
                    open: true,
                    events: vec![Ev::Cross { id: 0, over: false }],
                },
                CompCode {
                    open: false,
                    events: vec![l(&s, "r1"), Ev::Cross { id: 0, over: true }],
                },
            ],
            signs: vec![1],
        };
        let sm = code.smooth(0);
        assert_eq!(sm.comps.len(), 1);
        assert!(sm.comps[0].open);
        assert_eq!(sm.arc_word(0).0.len(), 1);
    }
}
