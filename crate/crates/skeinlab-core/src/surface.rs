//! Disk-with-bands presentations of the supported surfaces and the free-group
//! combinatorics of their curves.
//!
//! Model: a rectangle with all band attachment intervals ("gates") on the top
//! edge. Band order along the edge: for each handle i the four gates
//! a_i⁻ b_i⁻ a_i⁺ b_i⁺ interleaved (so μ(a_i, b_i) = 1), then for each extra
//! boundary component j the two adjacent gates r_j⁻ r_j⁺. π₁ is free on the
//! band letters; traversing letter x runs up through the x⁻ gate and back
//! down through x⁺.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A signed band letter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Letter {
    pub band: u8,
    pub inv: bool,
}

impl Letter {
    pub fn new(band: u8) -> Self {
        Letter { band, inv: false }
    }

    pub fn inverse(self) -> Self {
        Letter { band: self.band, inv: !self.inv }
    }

    pub fn cancels(self, o: Letter) -> bool {
        self.band == o.band && self.inv != o.inv
    }
}

/// A (not necessarily reduced) word in the band letters.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, o: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Word(v)
    }

    /// Free reduction (cancel adjacent inverse pairs).
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last().is_some_and(|&p| p.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }
}

/// Conjugacy-class key: cyclically reduced, lexicographically minimal rotation.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct CyclicWord(Vec<Letter>);

impl CyclicWord {
    pub fn empty() -> Self {
        CyclicWord(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word(self.0.clone())
    }

    pub fn inverse(&self) -> CyclicWord {
        cyclic_reduce(&self.to_word().inverse())
    }

    /// The global descending order on loop classes: length, then letters.
    pub fn cmp_order(&self, o: &CyclicWord) -> std::cmp::Ordering {
        self.0.len().cmp(&o.0.len()).then_with(|| self.0.cmp(&o.0))
    }
}

/// Cyclic reduction followed by canonical-rotation selection.
pub fn cyclic_reduce(w: &Word) -> CyclicWord {
    let mut v = w.reduce().0;
    while v.len() >= 2 && v.first().unwrap().cancels(*v.last().unwrap()) {
        v.pop();
        v.remove(0);
        // interior may now expose a new cancellation at the seam only; the
        // interior itself is already reduced
    }
    if v.is_empty() {
        return CyclicWord(v);
    }
    let mut best = v.clone();
    for r in 1..v.len() {
        let rot: Vec<Letter> = v[r..].iter().chain(v[..r].iter()).copied().collect();
        if rot < best {
            best = rot;
        }
    }
    CyclicWord(best)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BandKind {
    HandleA(usize),
    HandleB(usize),
    Planar(usize),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Band {
    pub name: String,
    pub kind: BandKind,
}

/// A supported surface: genus g with (boundaries) boundary components,
/// presented as the model rectangle with 2g + (boundaries−1) bands.
#[derive(Clone, PartialEq, Eq)]
pub struct SurfacePresentation {
    pub genus: usize,
    pub boundaries: usize,
    bands: Vec<Band>,
}

impl SurfacePresentation {
    pub fn new(genus: usize, boundaries: usize) -> Arc<Self> {
        assert!(boundaries >= 1, "surface needs at least one boundary component");
        let mut bands = Vec::new();
        for i in 1..=genus {
            bands.push(Band { name: format!("a{i}"), kind: BandKind::HandleA(i) });
            bands.push(Band { name: format!("b{i}"), kind: BandKind::HandleB(i) });
        }
        for j in 1..boundaries {
            bands.push(Band { name: format!("r{j}"), kind: BandKind::Planar(j) });
        }
        assert!(bands.len() <= u8::MAX as usize, "too many bands");
        Arc::new(SurfacePresentation { genus, boundaries, bands })
    }

    pub fn disk() -> Arc<Self> {
        Self::new(0, 1)
    }

    pub fn annulus() -> Arc<Self> {
        Self::new(0, 2)
    }

    /// Σ_{0,b+1}: the planar surface with b holes.
    pub fn planar(holes: usize) -> Arc<Self> {
        Self::new(0, holes + 1)
    }

    /// Σ_{g,1}.
    pub fn one_boundary(genus: usize) -> Arc<Self> {
        Self::new(genus, 1)
    }

    pub fn rank(&self) -> usize {
        self.bands.len()
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn band_index(&self, name: &str) -> Option<u8> {
        self.bands.iter().position(|b| b.name == name).map(|i| i as u8)
    }

    pub fn band_name(&self, idx: u8) -> &str {
        &self.bands[idx as usize].name
    }

    pub fn letter(&self, name: &str) -> Letter {
        match name.strip_suffix("^-1") {
            Some(base) => Letter {
                band: self.band_index(base.trim()).unwrap_or_else(|| panic!("unknown band {base:?}")),
                inv: true,
            },
            None => Letter {
                band: self.band_index(name).unwrap_or_else(|| panic!("unknown band {name:?}")),
                inv: false,
            },
        }
    }

    /// Parse a whitespace-separated word like "a1 b1 a1^-1 b1^-1".
    pub fn parse_word(&self, s: &str) -> Word {
        Word(s.split_whitespace().map(|t| self.letter(t)).collect())
    }

    pub fn word_string(&self, w: &[Letter]) -> String {
        w.iter()
            .map(|l| {
                if l.inv {
                    format!("{}^-1", self.band_name(l.band))
                } else {
                    self.band_name(l.band).to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Exponent-sum vector of a word over the band generators.
    pub fn homology_class(&self, w: &Word) -> Vec<i64> {
        let mut v = vec![0i64; self.rank()];
        for l in &w.0 {
            v[l.band as usize] += if l.inv { -1 } else { 1 };
        }
        v
    }

    /// The algebraic intersection form: symplectic on handle pairs, zero on
    /// planar classes.
    pub fn intersection_number(&self, u: &[i64], v: &[i64]) -> i64 {
        assert_eq!(u.len(), self.rank(), "intersection: vector rank mismatch");
        assert_eq!(v.len(), self.rank(), "intersection: vector rank mismatch");
        let mut s = 0;
        for i in 0..self.genus {
            let a = 2 * i;
            let b = 2 * i + 1;
            s += u[a] * v[b] - u[b] * v[a];
        }
        s
    }
}

impl fmt::Debug for SurfacePresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sigma_{{{},{}}}", self.genus, self.boundaries)
    }
}

/// A labelled curve with declared properties. Simplicity is declared, not
/// verified; the shipped libraries are hand-checked.
#[derive(Clone, PartialEq, Eq)]
pub struct NamedCurve {
    pub label: String,
    pub word: CyclicWord,
    pub simple: bool,
    pub separating: Option<bool>,
    pub homology: Vec<i64>,
}

impl NamedCurve {
    pub fn new(surface: &SurfacePresentation, label: &str, word_str: &str) -> Self {
        let word = cyclic_reduce(&surface.parse_word(word_str));
        let homology = surface.homology_class(&word.to_word());
        NamedCurve { label: label.to_string(), word, simple: true, separating: None, homology }
    }

    pub fn separating(mut self, yes: bool) -> Self {
        self.separating = Some(yes);
        self
    }
}

impl fmt::Debug for NamedCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// The shipped curve libraries, addressed by family name.
///
/// Families: "basic" (contractible loop; the core on the annulus),
/// "pure-braid" (c_i, c_{ij} on Σ_{0,b+1}), "lantern" (the seven curves on
/// Σ_{0,4}), "crossed-lantern" (the seven curves on Σ_{1,2}, with the third
/// band r1 playing the v role), "heegaard" (c_{a,i}, c_{b,j}, c_{i,j} and the
/// handlebody kernel pairs on Σ_{g,1}), "separating" (the handle-block
/// boundary on Σ_{g,1}, g ≥ 2).
pub fn standard_curves(surface: &SurfacePresentation, family: &str) -> Result<Vec<NamedCurve>, String> {
    let g = surface.genus;
    let b = surface.boundaries;
    if surface.rank() == 0 {
        return Ok(Vec::new()); // disk: every family is empty
    }
    match family {
        "basic" => {
            let mut out = vec![NamedCurve::new(surface, "contractible", "")];
            if g == 0 && b == 2 {
                out.push(NamedCurve::new(surface, "core", "r1"));
            }
            Ok(out)
        }
        "pure-braid" => {
            if g != 0 {
                return Err(format!("pure-braid family needs a planar surface, got genus {g}"));
            }
            let holes = b - 1;
            let mut out = Vec::new();
            for i in 1..=holes {
                out.push(NamedCurve::new(surface, &format!("c{i}"), &format!("r{i}")));
            }
            for i in 1..=holes {
                for j in (i + 1)..=holes {
                    out.push(NamedCurve::new(surface, &format!("c{i}{j}"), &format!("r{i} r{j}")));
                }
            }
            Ok(out)
        }
        "lantern" => {
            if g != 0 || b != 4 {
                return Err("lantern family lives on Sigma_{0,4}".into());
            }
            Ok(vec![
                NamedCurve::new(surface, "c1", "r1"),
                NamedCurve::new(surface, "c2", "r2"),
                NamedCurve::new(surface, "c3", "r3"),
                NamedCurve::new(surface, "c12", "r1 r2"),
                NamedCurve::new(surface, "c23", "r2 r3"),
                NamedCurve::new(surface, "c13", "r1 r3"),
                NamedCurve::new(surface, "c123", "r1 r2 r3"),
            ])
        }
        "crossed-lantern" => {
            if g != 1 || b != 2 {
                return Err("crossed-lantern family lives on Sigma_{1,2}".into());
            }
            // r1 is the v band: the extra boundary's loop.
            Ok(vec![
                NamedCurve::new(surface, "ca'", "a1"),
                NamedCurve::new(surface, "ca", "a1 r1^-1"),
                NamedCurve::new(surface, "cb", "b1"),
                NamedCurve::new(surface, "cb'", "b1 r1^-1"),
                NamedCurve::new(surface, "cv", "r1"),
                NamedCurve::new(surface, "cab", "a1 b1"),
                NamedCurve::new(surface, "cab'", "a1 b1 r1^-1"),
            ])
        }
        "heegaard" => {
            if b != 1 || g < 2 {
                return Err("heegaard family lives on Sigma_{g,1}, g >= 2".into());
            }
            let mut out = Vec::new();
            for i in 1..=g {
                out.push(NamedCurve::new(surface, &format!("ca{i}"), &format!("a{i}")));
                out.push(NamedCurve::new(surface, &format!("cb{i}"), &format!("b{i}")));
            }
            for i in 1..=g {
                for j in 1..=g {
                    if i != j {
                        out.push(NamedCurve::new(surface, &format!("c{i},{j}"), &format!("a{i} b{j}")));
                    }
                }
            }
            // Handlebody kernel bounding pairs: the a1 meridian and its copy
            // slid around the handle-2 block (likewise for b1 on the other
            // side). Both members bound disks in the respective handlebody.
            out.push(NamedCurve::new(surface, "ka'", "a1"));
            out.push(NamedCurve::new(surface, "ka", "a1 b2 a2 b2^-1 a2^-1"));
            out.push(NamedCurve::new(surface, "kb'", "b1"));
            out.push(NamedCurve::new(surface, "kb", "b1 a2 b2 a2^-1 b2^-1"));
            Ok(out)
        }
        "separating" => {
            if b != 1 || g < 2 {
                return Err("separating family lives on Sigma_{g,1}, g >= 2".into());
            }
            Ok(vec![NamedCurve::new(surface, "sep1", "a1 b1 a1^-1 b1^-1").separating(true)])
        }
        other => Err(format!("unknown curve family {other:?}")),
    }
}

pub fn find_curve(curves: &[NamedCurve], label: &str) -> Result<NamedCurve, String> {
    curves
        .iter()
        .find(|c| c.label == label)
        .cloned()
        .ok_or_else(|| format!("no curve labelled {label:?}"))
}

#[derive(Serialize, Deserialize)]
struct SurfaceJson {
    genus: usize,
    boundaries: usize,
}

#[derive(Serialize, Deserialize)]
struct CurveJson {
    label: String,
    word: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    separating: Option<bool>,
}

#[derive(Serialize, Deserialize)]
struct LibraryJson {
    surface: SurfaceJson,
    #[serde(default)]
    curves: Vec<CurveJson>,
}

/// Load {surface: {genus, boundaries}, curves: [{label, word, separating?}]}.
pub fn load_library(json: &str) -> Result<(Arc<SurfacePresentation>, Vec<NamedCurve>), String> {
    let lib: LibraryJson = serde_json::from_str(json).map_err(|e| format!("library JSON: {e}"))?;
    let surface = SurfacePresentation::new(lib.surface.genus, lib.surface.boundaries);
    let mut curves = Vec::new();
    for c in &lib.curves {
        for tok in c.word.split_whitespace() {
            let base = tok.strip_suffix("^-1").unwrap_or(tok);
            if surface.band_index(base).is_none() {
                return Err(format!("curve {:?}: unknown band {base:?}", c.label));
            }
        }
        let mut nc = NamedCurve::new(&surface, &c.label, &c.word);
        nc.separating = c.separating;
        curves.push(nc);
    }
    Ok((surface, curves))
}

impl FromStr for Word {
    type Err = String;
    fn from_str(_: &str) -> Result<Self, String> {
        Err("parse words through SurfacePresentation::parse_word".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_and_cyclic_reduction() {
        let s = SurfacePresentation::new(1, 2); // bands a1 b1 r1
        let w = s.parse_word("a1 a1^-1");
        assert!(cyclic_reduce(&w).is_empty());

        let w = s.parse_word("b1 a1 b1^-1");
        assert_eq!(cyclic_reduce(&w), cyclic_reduce(&s.parse_word("a1")));

        let xy = cyclic_reduce(&s.parse_word("a1 b1"));
        let yx = cyclic_reduce(&s.parse_word("b1 a1"));
        assert_eq!(xy, yx);

        // seam cancellation: b1 a1 a1^-1 b1^-1 c collapses fully
        let w = s.parse_word("b1 a1 a1^-1 b1^-1");
        assert!(cyclic_reduce(&w).is_empty());
    }

    #[test]
    fn homology_and_intersection() {
        let s = SurfacePresentation::one_boundary(1);
        let comm = s.parse_word("a1 b1 a1^-1 b1^-1");
        assert_eq!(s.homology_class(&comm), vec![0, 0]);
        assert_eq!(s.homology_class(&s.parse_word("a1 b1")), vec![1, 1]);
        assert_eq!(s.homology_class(&s.parse_word("a1 a1 b1^-1")), vec![2, -1]);

        let a = s.homology_class(&s.parse_word("a1"));
        let b = s.homology_class(&s.parse_word("b1"));
        assert_eq!(s.intersection_number(&a, &b), 1);
        assert_eq!(s.intersection_number(&b, &a), -1);
        assert_eq!(s.intersection_number(&a, &a), 0);

        let p = SurfacePresentation::planar(3);
        let r1 = p.homology_class(&p.parse_word("r1"));
        let r2 = p.homology_class(&p.parse_word("r2"));
        assert_eq!(p.intersection_number(&r1, &r2), 0);
    }

    #[test]
    fn homology_is_homomorphism() {
        let s = SurfacePresentation::new(2, 1);
        let u = s.parse_word("a1 b2 a2^-1");
        let v = s.parse_word("b1 b2 a1");
        let uv = u.concat(&v);
        let mut sum = s.homology_class(&u);
        for (x, y) in sum.iter_mut().zip(s.homology_class(&v)) {
            *x += y;
        }
        assert_eq!(s.homology_class(&uv), sum);
    }

    #[test]
    fn libraries() {
        let s3 = SurfacePresentation::planar(2);
        let pb = standard_curves(&s3, "pure-braid").unwrap();
        let labels: Vec<_> = pb.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["c1", "c2", "c12"]);

        let disk = SurfacePresentation::disk();
        assert!(standard_curves(&disk, "pure-braid").unwrap().is_empty());

        let s04 = SurfacePresentation::planar(3);
        let lantern = standard_curves(&s04, "lantern").unwrap();
        assert_eq!(lantern.len(), 7);

        let s12 = SurfacePresentation::new(1, 2);
        let cl = standard_curves(&s12, "crossed-lantern").unwrap();
        assert_eq!(cl.len(), 7);
        // declared homology: [ca] = a − v, [ca'] = a, etc.
        let ca = find_curve(&cl, "ca").unwrap();
        assert_eq!(ca.homology, vec![1, 0, -1]);
        let cab = find_curve(&cl, "cab'").unwrap();
        assert_eq!(cab.homology, vec![1, 1, -1]);

        let s21 = SurfacePresentation::one_boundary(2);
        let heeg = standard_curves(&s21, "heegaard").unwrap();
        let ka = find_curve(&heeg, "ka").unwrap();
        let ka_p = find_curve(&heeg, "ka'").unwrap();
        assert_eq!(ka.homology, ka_p.homology);
        let kb = find_curve(&heeg, "kb").unwrap();
        assert_eq!(kb.homology, find_curve(&heeg, "kb'").unwrap().homology);

        let sep = standard_curves(&s21, "separating").unwrap();
        assert_eq!(sep[0].homology, vec![0, 0, 0, 0]);
        assert_eq!(sep[0].separating, Some(true));

        // every declared homology class matches its word
        for (surf, fam) in [
            (s04.clone(), "lantern"),
            (s12.clone(), "crossed-lantern"),
            (s21.clone(), "heegaard"),
            (s21.clone(), "separating"),
        ] {
            for c in standard_curves(&surf, fam).unwrap() {
                assert_eq!(c.homology, surf.homology_class(&c.word.to_word()), "curve {}", c.label);
            }
        }
    }

    #[test]
    fn library_json_roundtrip() {
        let json = r#"{
            "surface": {"genus": 1, "boundaries": 2},
            "curves": [
                {"label": "ca", "word": "a1 r1^-1"},
                {"label": "sep", "word": "a1 b1 a1^-1 b1^-1", "separating": true}
            ]
        }"#;
        let (s, curves) = load_library(json).unwrap();
        assert_eq!(s.rank(), 3);
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[1].separating, Some(true));
        assert!(load_library(r#"{"surface":{"genus":0,"boundaries":2},"curves":[{"label":"x","word":"zz"}]}"#).is_err());
    }
}
