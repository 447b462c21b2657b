// Exhaustive solver for finite constraint systems whose constraints all
// have the shape `value[v] = table[value[u]]`. Natural transformations,
// compatible families and natural fiber maps are all of this form.

use alloc::vec;
use alloc::vec::Vec;

/// Value marking an undefined table entry; a constraint through it fails.
pub(crate) const UNDEFINED: u32 = u32::MAX;

#[derive(Debug)]
pub(crate) struct Overflow;

#[derive(Debug)]
pub(crate) struct FunctionalCsp {
    domains: Vec<u32>,
    links: Vec<(usize, usize, Vec<u32>)>,
}

impl FunctionalCsp {
    pub(crate) fn new(domains: Vec<u32>) -> Self {
        FunctionalCsp { domains, links: Vec::new() }
    }

    /// Requires `value[v] == table[value[u]]`.
    pub(crate) fn link(&mut self, u: usize, v: usize, table: Vec<u32>) {
        self.links.push((u, v, table));
    }

    /// All solutions, lexicographically ordered by variable index.
    pub(crate) fn solve_all(&self, limit: usize) -> Result<Vec<Vec<u32>>, Overflow> {
        let n = self.domains.len();
        // Links checked (or used to force a value) once the later of their
        // two endpoints is assigned.
        let mut at: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, (u, v, _)) in self.links.iter().enumerate() {
            at[(*u).max(*v)].push(i);
        }
        let mut out = Vec::new();
        let mut value = vec![0u32; n];
        self.search(0, &at, &mut value, &mut out, limit)?;
        Ok(out)
    }

    fn search(
        &self,
        var: usize,
        at: &[Vec<usize>],
        value: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
        limit: usize,
    ) -> Result<(), Overflow> {
        if var == self.domains.len() {
            if out.len() >= limit {
                return Err(Overflow);
            }
            out.push(value.clone());
            return Ok(());
        }
        // A link from an earlier variable pins this one.
        let mut forced: Option<u32> = None;
        for &li in &at[var] {
            let (u, v, ref table) = self.links[li];
            if v == var && u < var {
                let want = table[value[u] as usize];
                match forced {
                    Some(w) if w != want => return Ok(()),
                    _ => forced = Some(want),
                }
            }
        }
        let candidates: core::ops::Range<u32> = match forced {
            Some(w) if w == UNDEFINED || w >= self.domains[var] => return Ok(()),
            Some(w) => w..w + 1,
            None => 0..self.domains[var],
        };
        'values: for c in candidates {
            value[var] = c;
            for &li in &at[var] {
                let (u, v, ref table) = self.links[li];
                if table[value[u] as usize] != value[v] {
                    continue 'values;
                }
            }
            self.search(var + 1, at, value, out, limit)?;
        }
        Ok(())
    }
}
