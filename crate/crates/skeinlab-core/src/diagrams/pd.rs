//! Planar-diagram codes for links in the disk.
//!
//! A crossing X(a,b,c,d) lists its four edges in clockwise port order
//! starting from the incoming under-strand edge a; the under strand leaves
//! at c, the over strand occupies b and d. Which over port is incoming is
//! recovered by consistency propagation (every edge leaves exactly one
//! crossing and enters exactly one); components that never pass under are
//! resolved by consecutive edge numbering. A crossing is positive exactly
//! when the over strand enters at the b port.

use super::code::{Code, CompCode, Ev};

/// Extract 4-tuples from any of the common textual forms:
/// `[[1,4,2,5],[3,6,4,1],[5,2,6,3]]`, `PD[X[1,4,2,5], ...]`, `X(1,4,2,5) ...`.
/// Only the integers matter; they are read in order and chunked.
pub fn parse_pd(text: &str) -> Result<Vec<[i64; 4]>, String> {
    let mut nums: Vec<i64> = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_ascii_digit() {
            cur.push(ch);
        } else if !cur.is_empty() {
            nums.push(cur.parse::<i64>().map_err(|e| e.to_string())?);
            cur.clear();
        }
    }
    if !cur.is_empty() {
        nums.push(cur.parse::<i64>().map_err(|e| e.to_string())?);
    }
    if nums.is_empty() {
        return Err("no crossings found in PD input".to_string());
    }
    if nums.len() % 4 != 0 {
        return Err(format!("PD input has {} numbers, not a multiple of 4", nums.len()));
    }
    Ok(nums.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect())
}

/// Where one occurrence of an edge sits: crossing index and port 0..4.
type Occ = (usize, usize);

fn occurrences(pd: &[[i64; 4]]) -> Result<Vec<[Occ; 2]>, String> {
    let n = pd.len();
    let mut occ: Vec<Vec<Occ>> = vec![Vec::new(); 2 * n + 1];
    for (k, x) in pd.iter().enumerate() {
        for (port, &e) in x.iter().enumerate() {
            if e < 1 || e as usize > 2 * n {
                return Err(format!("edge {e} out of range 1..{}", 2 * n));
            }
            occ[e as usize].push((k, port));
        }
    }
    let mut out = Vec::with_capacity(2 * n);
    for (e, v) in occ.iter().enumerate().skip(1) {
        if v.len() != 2 {
            return Err(format!("edge {e} appears {} times, expected 2", v.len()));
        }
        out.push([v[0], v[1]]);
    }
    Ok(out)
}

pub fn code_from_pd(pd: &[[i64; 4]]) -> Result<Code, String> {
    if pd.is_empty() {
        return Err("PD code has no crossings".to_string());
    }
    let n = pd.len();
    let occ = occurrences(pd)?;
    // Orient each edge: it must leave one crossing and enter the other.
    // Under ports are fixed (enter at 0, leave at 2); over ports follow by
    // propagation, with a numbering fallback for all-over components.
    // incoming[e-1] / outgoing[e-1]: the resolved occurrence, if known.
    let mut incoming: Vec<Option<Occ>> = vec![None; 2 * n];
    let mut outgoing: Vec<Option<Occ>> = vec![None; 2 * n];
    let set = |tab: &mut Vec<Option<Occ>>, e: i64, o: Occ, what: &str| -> Result<(), String> {
        let slot = &mut tab[e as usize - 1];
        match slot {
            Some(prev) if *prev != o => Err(format!("edge {e} {what} at two crossings")),
            _ => {
                *slot = Some(o);
                Ok(())
            }
        }
    };
    for (k, x) in pd.iter().enumerate() {
        set(&mut incoming, x[0], (k, 0), "incoming")?;
        set(&mut outgoing, x[2], (k, 2), "outgoing")?;
    }
    // over_in[k]: Some(true) if the over strand enters at port b (positive).
    let mut over_in: Vec<Option<bool>> = vec![None; n];
    loop {
        let mut progress = false;
        for k in 0..n {
            if over_in[k].is_some() {
                continue;
            }
            let (b, d) = (pd[k][1], pd[k][3]);
            let other = |e: i64, here: usize| -> Occ {
                let [o1, o2] = occ[e as usize - 1];
                if o1 == (k, here) {
                    o2
                } else {
                    o1
                }
            };
            // the edge's other occurrence forces this one
            let choice = if outgoing[b as usize - 1] == Some(other(b, 1))
                || incoming[d as usize - 1] == Some(other(d, 3))
            {
                Some(true)
            } else if incoming[b as usize - 1] == Some(other(b, 1))
                || outgoing[d as usize - 1] == Some(other(d, 3))
            {
                Some(false)
            } else {
                None
            };
            if let Some(b_in) = choice {
                let (e_in, p_in, e_out, p_out) =
                    if b_in { (b, 1, d, 3) } else { (d, 3, b, 1) };
                set(&mut incoming, e_in, (k, p_in), "incoming")?;
                set(&mut outgoing, e_out, (k, p_out), "outgoing")?;
                over_in[k] = Some(b_in);
                progress = true;
            }
        }
        if progress {
            continue;
        }
        // stalled: a component passing over everywhere; use numbering
        match over_in.iter().position(|o| o.is_none()) {
            None => break,
            Some(k) => {
                let (b, d) = (pd[k][1], pd[k][3]);
                let b_in = if d == b + 1 {
                    true
                } else if b == d + 1 {
                    false
                } else {
                    // wraparound: the larger number is the incoming edge
                    b > d
                };
                let (e_in, p_in, e_out, p_out) =
                    if b_in { (b, 1, d, 3) } else { (d, 3, b, 1) };
                set(&mut incoming, e_in, (k, p_in), "incoming")?;
                set(&mut outgoing, e_out, (k, p_out), "outgoing")?;
                over_in[k] = Some(b_in);
            }
        }
    }
    for e in 1..=2 * n {
        if incoming[e - 1].is_none() || outgoing[e - 1].is_none() {
            return Err(format!("edge {e} is not oriented consistently"));
        }
    }
    // walk components: entering crossing k along edge e, emit the pass and
    // continue with the outgoing edge of the same strand
    let mut visited = vec![false; 2 * n];
    let mut comps = Vec::new();
    for start in 1..=2 * n {
        if visited[start - 1] {
            continue;
        }
        let mut events = Vec::new();
        let mut e = start;
        loop {
            visited[e - 1] = true;
            let (k, port) = incoming[e - 1].expect("oriented above");
            let next = if port == 0 {
                events.push(Ev::Cross { id: k, over: false });
                pd[k][2]
            } else {
                events.push(Ev::Cross { id: k, over: true });
                let b_in = over_in[k].expect("resolved above");
                if b_in {
                    pd[k][3]
                } else {
                    pd[k][1]
                }
            };
            e = next as usize;
            if e == start {
                break;
            }
            if visited[e - 1] {
                return Err(format!("edge {e} revisited before closing its component"));
            }
        }
        comps.push(CompCode { open: false, events });
    }
    let signs = over_in
        .iter()
        .map(|o| if o.expect("resolved above") { 1i8 } else { -1i8 })
        .collect();
    let code = Code { comps, signs };
    code.validate();
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RIGHT_TREFOIL: [[i64; 4]; 3] = [[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]];

    #[test]
    fn parse_accepts_common_forms() {
        let want = RIGHT_TREFOIL.to_vec();
        assert_eq!(parse_pd("[[1,4,2,5],[3,6,4,1],[5,2,6,3]]").unwrap(), want);
        assert_eq!(parse_pd("PD[X[1,4,2,5], X[3,6,4,1], X[5,2,6,3]]").unwrap(), want);
        assert_eq!(parse_pd("X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)").unwrap(), want);
        assert!(parse_pd("1 2 3").is_err());
        assert!(parse_pd("no numbers here").is_err());
    }

    #[test]
    fn right_trefoil_is_positive() {
        let code = code_from_pd(&RIGHT_TREFOIL).unwrap();
        assert_eq!(code.comps.len(), 1);
        assert_eq!(code.writhe(), 3);
        // alternating: no kink or bigon survives cleanup
        let (clean, kinks, circles) = code.cleanup();
        assert_eq!((clean.cross_total(), kinks, circles), (3, 0, 0));
    }

    #[test]
    fn mirror_swaps_over_ports() {
        // swapping b and d in every tuple mirrors the link
        let left: Vec<[i64; 4]> =
            RIGHT_TREFOIL.iter().map(|x| [x[0], x[3], x[2], x[1]]).collect();
        let code = code_from_pd(&left).unwrap();
        assert_eq!(code.writhe(), -3);
    }

    #[test]
    fn figure_eight_balances() {
        let pd = [[4, 1, 5, 2], [2, 8, 3, 7], [8, 5, 1, 6], [6, 4, 7, 3]];
        let code = code_from_pd(&pd).unwrap();
        assert_eq!(code.comps.len(), 1);
        assert_eq!(code.cross_total(), 4);
        assert_eq!(code.writhe(), 0);
        let mut signs = code.signs.clone();
        signs.sort_unstable();
        assert_eq!(signs, vec![-1, -1, 1, 1]);
    }

    #[test]
    fn hopf_link_two_components() {
        let code = code_from_pd(&[[1, 3, 2, 4], [4, 2, 3, 1]]).unwrap();
        assert_eq!(code.comps.len(), 2);
        assert_eq!(code.writhe(), 2);
    }

    #[test]
    fn kinked_unknots() {
        let pos = code_from_pd(&[[1, 2, 2, 1]]).unwrap();
        assert_eq!(pos.writhe(), 1);
        let (clean, kinks, circles) = pos.cleanup();
        assert!(clean.comps.is_empty());
        assert_eq!((kinks, circles), (1, 1));
        let neg = code_from_pd(&[[1, 1, 2, 2]]).unwrap();
        assert_eq!(neg.writhe(), -1);
    }

    #[test]
    fn all_over_component_falls_back_to_numbering() {
        // one circle lying entirely over another: propagation alone cannot
        // orient the top circle
        let code = code_from_pd(&[[1, 4, 2, 3], [2, 4, 1, 3]]).unwrap();
        assert_eq!(code.comps.len(), 2);
        assert_eq!(code.writhe(), 0);
        let (clean, kinks, circles) = code.cleanup();
        assert!(clean.comps.is_empty());
        assert_eq!((kinks, circles), (0, 2));
    }

    #[test]
    fn malformed_codes_are_rejected() {
        assert!(code_from_pd(&[]).is_err());
        assert!(code_from_pd(&[[1, 2, 3, 4]]).is_err());
        assert!(code_from_pd(&[[1, 1, 1, 2]]).is_err());
    }
}
