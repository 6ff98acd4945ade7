use super::bcjr::{label_metrics, length_error};
use super::kernel::{
    backward_row, backward_row_acc, forward_row, forward_row_acc, joint_metric, normalize, to_natural,
    to_split, Exact, Linear, MaxLog, MaxStar,
};
use super::spectrum::weight_to_zero;
use super::{compute_distance_spectrum, CodeSpec, DecodingAlgo, Termination};
use crate::error::{Error, Result};
use crate::Bit;
use std::collections::{BTreeMap, HashMap};
use std::io::Write;

/// Product trellis of two copies of `g`, realizing `[[g, 0, g], [0, g, g]]`.
///
/// The compound state is `s1 * S + s2` and the compound input is
/// `b1 * 2 + b2`, so source 1 is always the high-order part. A branch emits
/// the label of source 1, the label of source 2 and their XOR.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundTrellis {
    code: CodeSpec,
}

/// Builds the compound code of NCC from the per-source code `g`.
pub fn build_compound_code(g: &CodeSpec) -> CompoundTrellis {
    CompoundTrellis { code: g.clone() }
}

impl CompoundTrellis {
    pub fn component(&self) -> &CodeSpec {
        &self.code
    }

    pub fn n_states(&self) -> usize {
        let s = self.code.trellis().n_states();
        s * s
    }

    #[inline]
    fn split(&self, state: usize) -> (usize, usize) {
        let s = self.code.trellis().n_states();
        (state / s, state % s)
    }

    pub fn next_state(&self, state: usize, input: usize) -> usize {
        let t = self.code.trellis();
        let (s1, s2) = self.split(state);
        let n1 = t.next_state(s1, (input >> 1) as Bit & 1);
        let n2 = t.next_state(s2, input as Bit & 1);
        n1 * t.n_states() + n2
    }

    /// `(c1 label, c2 label, XOR label)` of a compound branch.
    pub fn output(&self, state: usize, input: usize) -> (u32, u32, u32) {
        let t = self.code.trellis();
        let (s1, s2) = self.split(state);
        let o1 = t.output(s1, (input >> 1) as Bit & 1);
        let o2 = t.output(s2, input as Bit & 1);
        (o1, o2, o1 ^ o2)
    }
}

/// One weight pattern `W_d = {d1, d2, dR}` of the compound code with the
/// input weights it carries for each source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct CompoundEntry {
    pub d: u32,
    pub d1: u32,
    pub d2: u32,
    #[serde(rename = "dR")]
    pub dr: u32,
    pub w1: u64,
    pub w2: u64,
    #[serde(skip)]
    pub events: u64,
}

impl CompoundEntry {
    pub fn nonzero_blocks(&self) -> usize {
        [self.d1, self.d2, self.dr].iter().filter(|&&x| x > 0).count()
    }
}

/// Extended error-event spectrum of the compound code.
#[derive(Debug, Clone, PartialEq)]
pub struct CompoundSpectrum {
    entries: Vec<CompoundEntry>,
    min_distance: u32,
    component_free_distance: u32,
    d_max: u32,
}

impl CompoundSpectrum {
    /// Entries sorted by (d, d1, d2, dR).
    pub fn entries(&self) -> &[CompoundEntry] {
        &self.entries
    }

    /// Minimum compound distance F.
    pub fn min_distance(&self) -> u32 {
        self.min_distance
    }

    /// Minimum distance f of the component code.
    pub fn component_free_distance(&self) -> u32 {
        self.component_free_distance
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    /// Patterns at output weight `d`.
    pub fn at(&self, d: u32) -> impl Iterator<Item = &CompoundEntry> {
        self.entries.iter().filter(move |e| e.d == d)
    }

    /// F = 2f and the patterns at F are exactly {f,f,0}, {f,0,f}, {0,f,f}.
    pub fn satisfies_min_distance_law(&self) -> bool {
        let f = self.component_free_distance;
        let mut at_f: Vec<_> = self.at(self.min_distance).map(|e| (e.d1, e.d2, e.dr)).collect();
        at_f.sort_unstable();
        self.min_distance == 2 * f && at_f == vec![(0, f, f), (f, 0, f), (f, f, 0)]
    }

    /// Every listed pattern has at least two non-zero blocks.
    pub fn satisfies_two_block_law(&self) -> bool {
        self.entries.iter().all(|e| e.nonzero_blocks() >= 2)
    }

    pub fn truncated(&self, d_max: u32) -> Self {
        Self {
            entries: self.entries.iter().copied().filter(|e| e.d <= d_max).collect(),
            d_max: d_max.min(self.d_max),
            ..*self
        }
    }

    /// Writes `d,d1,d2,dR,w1,w2` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(out);
        for e in &self.entries {
            wr.serialize(e)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        wr.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Enumerates the compound error events of weight at most `d_max` and
/// aggregates them per weight pattern.
///
/// Events start with at least one source diverging at the first section and
/// end on the first return of the product state to (0, 0).
pub fn compute_compound_spectrum(g: &CompoundTrellis, d_max: u32) -> Result<CompoundSpectrum> {
    let code = g.component();
    let t = code.trellis();
    // f is needed to validate the budget; the component search is cheap.
    let mut probe = 8;
    let single = loop {
        match compute_distance_spectrum(code, probe) {
            Ok(s) => break s,
            Err(Error::Truncated(_)) if probe < 1024 => probe *= 2,
            Err(e) => return Err(e),
        }
    };
    let f = single.free_distance();
    if d_max < 2 * f {
        return Err(Error::Truncated(format!(
            "d_max = {d_max} is below 2f = {} for code {}; the minimum compound distance is not reached",
            2 * f,
            code.label()
        )));
    }

    let s = t.n_states();
    let to_zero = weight_to_zero(t);
    let bound = |s1: usize, s2: usize| to_zero[s1] + to_zero[s2];

    type Key = (u32, u8, u8, u8); // (compound state, d1, d2, dR)
    let mut done: BTreeMap<(u32, u32, u32), (u64, u64, u64)> = BTreeMap::new();
    let mut frontier: HashMap<Key, (u64, u64, u64)> = HashMap::new();
    let max_sections = (s as u64 * s as u64 * (d_max as u64 + 2)).min(u32::MAX as u64) as u32;

    let push = |map: &mut HashMap<Key, (u64, u64, u64)>,
                    done: &mut BTreeMap<(u32, u32, u32), (u64, u64, u64)>,
                    s1: usize,
                    s2: usize,
                    d: (u32, u32, u32),
                    acc: (u64, u64, u64)| {
        if d.0 + d.1 + d.2 + bound(s1, s2) > d_max {
            return;
        }
        let slot = if s1 == 0 && s2 == 0 {
            done.entry(d).or_default()
        } else {
            map.entry(((s1 * s + s2) as u32, d.0 as u8, d.1 as u8, d.2 as u8))
                .or_default()
        };
        slot.0 += acc.0;
        slot.1 += acc.1;
        slot.2 += acc.2;
    };

    for input in 1..4usize {
        let (b1, b2) = ((input >> 1) as u8, (input & 1) as u8);
        let (o1, o2, or) = g.output(0, input);
        push(
            &mut frontier,
            &mut done,
            t.next_state(0, b1),
            t.next_state(0, b2),
            (o1.count_ones(), o2.count_ones(), or.count_ones()),
            (1, b1 as u64, b2 as u64),
        );
    }

    let mut section = 1;
    while !frontier.is_empty() {
        section += 1;
        if section > max_sections {
            return Err(Error::InvalidCode(format!(
                "code {} is catastrophic (zero-weight cycle)",
                code.label()
            )));
        }
        let mut next = HashMap::with_capacity(frontier.len());
        for (&(state, d1, d2, dr), &(count, w1, w2)) in &frontier {
            let (s1, s2) = (state as usize / s, state as usize % s);
            for b1 in 0..2u8 {
                for b2 in 0..2u8 {
                    let o1 = t.output(s1, b1);
                    let o2 = t.output(s2, b2);
                    let d = (
                        d1 as u32 + o1.count_ones(),
                        d2 as u32 + o2.count_ones(),
                        dr as u32 + (o1 ^ o2).count_ones(),
                    );
                    push(
                        &mut next,
                        &mut done,
                        t.next_state(s1, b1),
                        t.next_state(s2, b2),
                        d,
                        (count, w1 + b1 as u64 * count, w2 + b2 as u64 * count),
                    );
                }
            }
        }
        frontier = next;
    }

    let mut entries: Vec<CompoundEntry> = done
        .into_iter()
        .map(|((d1, d2, dr), (events, w1, w2))| CompoundEntry {
            d: d1 + d2 + dr,
            d1,
            d2,
            dr,
            w1,
            w2,
            events,
        })
        .collect();
    entries.sort_by_key(|e| (e.d, e.d1, e.d2, e.dr));
    let min_distance = entries.first().map(|e| e.d).ok_or_else(|| {
        Error::Truncated(format!("no compound event with weight <= {d_max}"))
    })?;
    Ok(CompoundSpectrum {
        entries,
        min_distance,
        component_free_distance: f,
        d_max,
    })
}

/// Decisions and a-posteriori LLRs for both sources.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDecodeOutput {
    pub bits1: Vec<Bit>,
    pub bits2: Vec<Bit>,
    pub llrs1: Vec<f64>,
    pub llrs2: Vec<f64>,
}

/// Joint network/channel decoding: log-MAP BCJR over the compound trellis.
/// The three LLR streams are aligned symbol by symbol with the codewords
/// `c1`, `c2` and `c1 XOR c2`.
pub fn joint_decode_ncc(
    llr_s1: &[f64],
    llr_s2: &[f64],
    llr_nc: &[f64],
    g: &CompoundTrellis,
) -> Result<JointDecodeOutput> {
    joint_decode_ncc_with(llr_s1, llr_s2, llr_nc, g, DecodingAlgo::LogMap)
}

pub fn joint_decode_ncc_with(
    llr_s1: &[f64],
    llr_s2: &[f64],
    llr_nc: &[f64],
    g: &CompoundTrellis,
    algo: DecodingAlgo,
) -> Result<JointDecodeOutput> {
    let code = g.component();
    if code.termination() != Termination::ZeroTail {
        return Err(Error::InvalidCode(
            "joint decoding supports zero-tail codes only".into(),
        ));
    }
    let n = llr_s1.len();
    for other in [llr_s2.len(), llr_nc.len()] {
        if other != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: other,
            });
        }
    }
    let k = code.info_len(n).map_err(|_| length_error(code, n))?;
    for stream in [llr_s1, llr_s2, llr_nc] {
        if let Some(i) = stream.iter().position(|l| !l.is_finite()) {
            return Err(Error::InvalidArgument(format!("LLR {i} is not finite")));
        }
    }
    Ok(match algo {
        DecodingAlgo::LogMap => run::<Exact>(g, [llr_s1, llr_s2, llr_nc], k),
        DecodingAlgo::MaxLogMap => run::<MaxLog>(g, [llr_s1, llr_s2, llr_nc], k),
        DecodingAlgo::LinearLogMap => run::<Linear>(g, [llr_s1, llr_s2, llr_nc], k),
    })
}

/// Branch metrics of one compound section arranged for the row kernels:
/// row `o1 * 2 + b2` holds, over the source-2 states `s2` in split order,
/// the metric of a branch whose source-1 label is `o1` and whose source-2
/// branch leaves `s2` with input `b2`.
struct SectionMetrics {
    w: usize,
    s: usize,
    labels2: [Vec<usize>; 2],
    m1: Vec<f64>,
    m2: Vec<f64>,
    mr: Vec<f64>,
    out: Vec<f64>,
}

impl SectionMetrics {
    fn new(code: &CodeSpec) -> Self {
        let t = code.trellis();
        let s = t.n_states();
        let w = 1usize << code.n_outputs();
        Self {
            w,
            s,
            labels2: [0u8, 1].map(|b| {
                let natural: Vec<f64> = (0..s).map(|st| t.output(st, b) as f64).collect();
                let mut split = vec![0.0; s];
                to_split(&natural, &mut split);
                split.into_iter().map(|x| x as usize).collect()
            }),
            m1: vec![0.0; w],
            m2: vec![0.0; w],
            mr: vec![0.0; w],
            out: vec![0.0; w * 2 * s],
        }
    }

    fn fill(&mut self, llrs: [&[f64]; 3], sec: usize, n: usize) {
        let span = sec * n..(sec + 1) * n;
        label_metrics(&llrs[0][span.clone()], &mut self.m1);
        label_metrics(&llrs[1][span.clone()], &mut self.m2);
        label_metrics(&llrs[2][span], &mut self.mr);
        let (w, s) = (self.w, self.s);
        for o1 in 0..w {
            for b2 in 0..2 {
                let row = &mut self.out[(o1 * 2 + b2) * s..(o1 * 2 + b2 + 1) * s];
                for (slot, &o2) in row.iter_mut().zip(&self.labels2[b2]) {
                    *slot = self.m1[o1] + self.m2[o2] + self.mr[o1 ^ o2];
                }
            }
        }
    }

    /// Metric rows for source-2 inputs 0 and 1 given source-1 label `o1`.
    #[inline]
    fn rows(&self, o1: usize) -> (&[f64], &[f64]) {
        self.out[o1 * 2 * self.s..(o1 + 1) * 2 * self.s].split_at(self.s)
    }
}

fn run<M: MaxStar>(g: &CompoundTrellis, llrs: [&[f64]; 3], k: usize) -> JointDecodeOutput {
    let code = g.component();
    let t = code.trellis();
    let s = t.n_states();
    let p = s * s;
    let n = code.n_outputs();
    let sections = code.sections(k);
    let mut gm = SectionMetrics::new(code);

    let next: Vec<[(usize, usize); 2]> = (0..s)
        .map(|st| [0u8, 1].map(|b| (t.next_state(st, b), t.output(st, b) as usize)))
        .collect();
    let prev: Vec<[(usize, usize); 2]> = (0..s)
        .map(|st| {
            t.predecessors(st)
                .map(|(ps, b)| (ps as usize, t.output(ps as usize, b) as usize))
        })
        .collect();

    // Beta rows (one per source-1 state) in natural order, alpha rows in
    // split order.
    let mut beta = vec![f64::NEG_INFINITY; (sections + 1) * p];
    beta[sections * p] = 0.0;
    let mut split_row = vec![0.0; s];
    for sec in (0..sections).rev() {
        gm.fill(llrs, sec, n);
        let (cur, nxt) = beta[sec * p..(sec + 2) * p].split_at_mut(p);
        for (s1, row) in cur.chunks_exact_mut(s).enumerate() {
            let [(n0, o0), (n1, o1)] = next[s1];
            let (a0, a1) = gm.rows(o0);
            backward_row::<M>(&nxt[n0 * s..(n0 + 1) * s], a0, a1, &mut split_row);
            let (b0, b1) = gm.rows(o1);
            backward_row_acc::<M>(&nxt[n1 * s..(n1 + 1) * s], b0, b1, &mut split_row);
            to_natural(&split_row, row);
        }
        normalize(cur);
    }

    let mut alpha = vec![f64::NEG_INFINITY; p];
    alpha[0] = 0.0;
    let mut alpha_next = vec![f64::NEG_INFINITY; p];
    let mut natural_row = vec![0.0; s];
    let h = s / 2;
    let mut llrs1 = Vec::with_capacity(k);
    let mut llrs2 = Vec::with_capacity(k);
    for sec in 0..sections {
        gm.fill(llrs, sec, n);
        // The input bits of a branch are the top bits of the states it
        // enters, so the a-posteriori metrics come from alpha and beta of
        // the next section; acc[b1][b2].
        let bn = &beta[(sec + 1) * p..(sec + 2) * p];
        let mut acc = [[f64::NEG_INFINITY; 2]; 2];
        for (n1, row) in alpha_next.chunks_exact_mut(s).enumerate() {
            let [(p0, o0), (p1, o1)] = prev[n1];
            let (a0, a1) = gm.rows(o0);
            forward_row::<M>(&alpha[p0 * s..(p0 + 1) * s], a0, a1, &mut natural_row);
            let (b0, b1) = gm.rows(o1);
            forward_row_acc::<M>(&alpha[p1 * s..(p1 + 1) * s], b0, b1, &mut natural_row);
            if sec < k {
                let b = &bn[n1 * s..(n1 + 1) * s];
                let a = &mut acc[n1 / h];
                a[0] = M::max_star(a[0], joint_metric::<M>(&natural_row[..h], &b[..h]));
                a[1] = M::max_star(a[1], joint_metric::<M>(&natural_row[h..], &b[h..]));
            }
            to_split(&natural_row, row);
        }
        if sec < k {
            let u1 = [
                M::max_star(acc[0][0], acc[0][1]),
                M::max_star(acc[1][0], acc[1][1]),
            ];
            let u2 = [
                M::max_star(acc[0][0], acc[1][0]),
                M::max_star(acc[0][1], acc[1][1]),
            ];
            llrs1.push(u1[0] - u1[1]);
            llrs2.push(u2[0] - u2[1]);
        }
        normalize(&mut alpha_next);
        std::mem::swap(&mut alpha, &mut alpha_next);
    }

    let decide = |l: &Vec<f64>| l.iter().map(|&x| Bit::from(x < 0.0)).collect();
    JointDecodeOutput {
        bits1: decide(&llrs1),
        bits2: decide(&llrs2),
        llrs1,
        llrs2,
    }
}
