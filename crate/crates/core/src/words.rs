//! Words of oriented segment letters and retrace (free) reduction with
//! matching up to reparametrization.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loopcore::bump::gauss_legendre;
use crate::loopcore::library::uniform_loop;
use crate::loopcore::sets::{interior_turning_points, ROOT_TOL};
use crate::loopcore::{AmbientSpace, Loop, Segment, CONTINUITY_TOL};
use crate::numeric::{dist, norm};

/// Default sup-norm tolerance for matching normalized traces.
pub const MATCH_TOL: f64 = 1e-8;
/// Default number of arc-length samples for matching.
pub const MATCH_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub segment_id: usize,
    /// `+1` or `-1`.
    pub orientation: i8,
}

impl Letter {
    pub fn new(segment_id: usize, orientation: i8) -> Letter {
        Letter {
            segment_id,
            orientation,
        }
    }

    pub fn inverse(self) -> Letter {
        Letter {
            orientation: -self.orientation,
            ..self
        }
    }
}

/// Letters over a shared table of paths; letter `k` runs after letter `k-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<Letter>,
    pub segment_table: Vec<Arc<Segment>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitPolicy {
    Breakpoints,
    BreakpointsAndTurningPoints,
}

impl Word {
    pub fn new(letters: Vec<Letter>, segment_table: Vec<Arc<Segment>>) -> Result<Word> {
        let w = Word {
            letters,
            segment_table,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The path traced by one letter.
    pub fn path(&self, letter: Letter) -> Segment {
        let s = &self.segment_table[letter.segment_id];
        if letter.orientation > 0 {
            (**s).clone()
        } else {
            s.reversed()
        }
    }

    fn endpoints(&self, letter: Letter) -> (Vec<f64>, Vec<f64>) {
        let s = &self.segment_table[letter.segment_id];
        if letter.orientation > 0 {
            (s.start(), s.end())
        } else {
            (s.end(), s.start())
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, l) in self.letters.iter().enumerate() {
            if l.segment_id >= self.segment_table.len() {
                return Err(Error::InvalidWord(format!("letter {k} refers to missing segment {}", l.segment_id)));
            }
            if l.orientation != 1 && l.orientation != -1 {
                return Err(Error::InvalidWord(format!("letter {k} has orientation {}", l.orientation)));
            }
        }
        for k in 1..self.letters.len() {
            let (_, end) = self.endpoints(self.letters[k - 1]);
            let (start, _) = self.endpoints(self.letters[k]);
            if dist(&end, &start) > CONTINUITY_TOL * norm(&end).max(1.0) {
                return Err(Error::InvalidWord(format!("letters {} and {k} do not chain", k - 1)));
            }
        }
        Ok(())
    }

    /// Letters placed on a uniform partition; the empty word is the trivial
    /// loop.
    pub fn to_loop(&self, space: &AmbientSpace) -> Result<Loop> {
        if self.letters.is_empty() {
            return Ok(Loop::trivial(space.clone()));
        }
        let segs = self.letters.iter().map(|&l| self.path(l)).collect();
        uniform_loop(space.clone(), segs)
    }

    /// Same table, letters replaced.
    pub fn with_letters(&self, letters: Vec<Letter>) -> Word {
        Word {
            letters,
            segment_table: self.segment_table.clone(),
        }
    }
}

/// Splits `γ` into letters: one per smooth piece, further cut at interior
/// stationary points under the turning-point policy. Constant pieces are
/// dropped.
pub fn to_word(gamma: &Loop, policy: SplitPolicy) -> Result<Word> {
    let mut table = Vec::new();
    for piece in gamma.pieces() {
        let seg = piece.segment;
        if seg.is_constant() {
            continue;
        }
        let cuts = match policy {
            SplitPolicy::Breakpoints => vec![],
            SplitPolicy::BreakpointsAndTurningPoints => interior_turning_points(&seg, ROOT_TOL)?,
        };
        let mut bounds = vec![0.0];
        bounds.extend(cuts);
        bounds.push(1.0);
        for w in bounds.windows(2) {
            if w[1] > w[0] {
                table.push(Arc::new(seg.restricted(w[0], w[1])));
            }
        }
    }
    let letters = (0..table.len()).map(|k| Letter::new(k, 1)).collect();
    Word::new(letters, table)
}

/// Arc-length table of a path: cumulative length on a uniform cell grid.
pub(crate) struct ArcLength<'a> {
    seg: &'a Segment,
    cells: usize,
    cumulative: Vec<f64>,
    rule: &'static [(f64, f64)],
}

fn rule8() -> &'static [(f64, f64)] {
    static RULE: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

impl<'a> ArcLength<'a> {
    pub(crate) fn new(seg: &'a Segment, cells: usize) -> Self {
        let rule = rule8();
        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        let mut me = ArcLength {
            seg,
            cells,
            cumulative: vec![],
            rule,
        };
        for k in 0..cells {
            acc += me.partial(k as f64 / cells as f64, (k + 1) as f64 / cells as f64);
            cumulative.push(acc);
        }
        me.cumulative = cumulative;
        me
    }

    fn speed(&self, u: f64) -> f64 {
        norm(&self.seg.deriv(u))
    }

    pub(crate) fn partial(&self, a: f64, b: f64) -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.rule.iter().map(|&(x, w)| w * self.speed(m + h * x)).sum::<f64>() * h
    }

    pub(crate) fn total(&self) -> f64 {
        self.cumulative[self.cells]
    }

    /// Arc length over `[0, u]`.
    pub(crate) fn length_to(&self, u: f64) -> f64 {
        if u >= 1.0 {
            return self.total();
        }
        let k = ((u.max(0.0) * self.cells as f64) as usize).min(self.cells - 1);
        self.cumulative[k] + self.partial(k as f64 / self.cells as f64, u)
    }

    /// Parameter at which the arc length reaches `target`.
    pub(crate) fn invert(&self, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= self.total() {
            return 1.0;
        }
        let k = self.cumulative.partition_point(|&c| c <= target).saturating_sub(1).min(self.cells - 1);
        let mut lo = k as f64 / self.cells as f64;
        let mut hi = (k + 1) as f64 / self.cells as f64;
        let base = self.cumulative[k];
        let cell_lo = lo;
        let mut u = 0.5 * (lo + hi);
        for _ in 0..60 {
            let g = base + self.partial(cell_lo, u) - target;
            if g.abs() <= 1e-15 * self.total().max(1e-300) {
                break;
            }
            if g > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let v = self.speed(u);
            let newton = u - g / v;
            u = if v > 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= 1e-16 {
                break;
            }
        }
        u
    }
}

/// Whether two paths trace the same curve in the same direction, compared
/// after arc-length normalization.
pub fn match_up_to_reparam(s1: &Segment, s2: &Segment, tol: f64, samples: usize) -> bool {
    if s1 == s2 {
        return true;
    }
    match_paths(std::slice::from_ref(s1), std::slice::from_ref(s2), tol, samples)
}

/// Arc-length parametrization of a chain of segments.
struct Chain<'a> {
    parts: Vec<ArcLength<'a>>,
    offsets: Vec<f64>,
}

impl<'a> Chain<'a> {
    fn new(segs: &'a [Segment], samples: usize) -> Self {
        let cells = (samples / segs.len().max(1)).max(16);
        let parts: Vec<ArcLength> = segs.iter().map(|s| ArcLength::new(s, cells)).collect();
        let mut offsets = vec![0.0];
        for p in &parts {
            offsets.push(offsets.last().unwrap() + p.total());
        }
        Chain { parts, offsets }
    }

    fn total(&self) -> f64 {
        *self.offsets.last().unwrap()
    }

    fn point(&self, target: f64) -> Vec<f64> {
        let k = self
            .offsets
            .partition_point(|&o| o <= target)
            .saturating_sub(1)
            .min(self.parts.len() - 1);
        let part = &self.parts[k];
        part.seg.eval(part.invert(target - self.offsets[k]))
    }
}

/// [`match_up_to_reparam`] for paths given as chains of segments.
pub fn match_paths(p1: &[Segment], p2: &[Segment], tol: f64, samples: usize) -> bool {
    if p1.is_empty() || p2.is_empty() {
        return p1.is_empty() && p2.is_empty();
    }
    let ends = |p: &[Segment]| (p[0].start(), p[p.len() - 1].end());
    let ((a1, b1), (a2, b2)) = (ends(p1), ends(p2));
    if dist(&a1, &a2) > tol || dist(&b1, &b2) > tol {
        return false;
    }
    let samples = samples.max(2);
    let c1 = Chain::new(p1, samples);
    let c2 = Chain::new(p2, samples);
    let (l1, l2) = (c1.total(), c2.total());
    let tiny = 1e-14;
    match (l1 <= tiny, l2 <= tiny) {
        (true, true) => return true,
        (true, false) | (false, true) => return false,
        _ => {}
    }
    (1..samples).all(|k| {
        let sigma = k as f64 / samples as f64;
        dist(&c1.point(sigma * l1), &c2.point(sigma * l2)) < tol
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReduceOptions {
    pub tol: f64,
    pub samples: usize,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        ReduceOptions {
            tol: MATCH_TOL,
            samples: MATCH_SAMPLES,
        }
    }
}

/// Stack reducer that remembers which letter pairs cancel.
pub struct Reducer {
    opts: ReduceOptions,
    memo: HashMap<(Letter, Letter), bool>,
}

/// Reduced word plus the cancelled index pairs (into the input), in the order
/// they were cancelled.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub word: Word,
    pub cancellations: Vec<(usize, usize)>,
}

impl Reduction {
    /// One line per cancelled pair.
    pub fn certificate_log(&self) -> String {
        let mut s = String::new();
        for (k, (i, j)) in self.cancellations.iter().enumerate() {
            let _ = writeln!(s, "cancel {k}: letters {i} and {j}");
        }
        let _ = writeln!(s, "remaining letters: {}", self.word.len());
        s
    }
}

impl Reducer {
    pub fn new(opts: ReduceOptions) -> Self {
        Reducer {
            opts,
            memo: HashMap::new(),
        }
    }

    /// Whether `b` directly after `a` is a retracing.
    pub fn cancels(&mut self, word: &Word, a: Letter, b: Letter) -> bool {
        if a.segment_id == b.segment_id {
            return a.orientation == -b.orientation;
        }
        if let Some(&hit) = self.memo.get(&(a, b)) {
            return hit;
        }
        let hit = match_up_to_reparam(
            &word.path(b),
            &word.path(a.inverse()),
            self.opts.tol,
            self.opts.samples,
        );
        self.memo.insert((a, b), hit);
        self.memo.insert((b, a), hit);
        hit
    }

    pub fn reduce(&mut self, word: &Word) -> Reduction {
        let mut stack: Vec<usize> = Vec::with_capacity(word.len());
        let mut cancellations = Vec::new();
        for (i, &l) in word.letters.iter().enumerate() {
            if let Some(&j) = stack.last() {
                if self.cancels(word, word.letters[j], l) {
                    stack.pop();
                    cancellations.push((j, i));
                    continue;
                }
            }
            stack.push(i);
        }
        Reduction {
            word: word.with_letters(stack.iter().map(|&i| word.letters[i]).collect()),
            cancellations,
        }
    }
}

pub fn reduce(word: &Word, opts: ReduceOptions) -> Reduction {
    Reducer::new(opts).reduce(word)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    TrivialCertificate {
        letters: usize,
        cancellations: Vec<(usize, usize)>,
    },
    NotReduced {
        letters: usize,
        remaining: usize,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Verdict::TrivialCertificate { .. })
    }
}

/// Splits at breakpoints and turning points, reduces, and certifies
/// triviality when nothing remains.
pub fn is_retrace_trivial(gamma: &Loop, opts: ReduceOptions) -> Verdict {
    let word = match to_word(gamma, SplitPolicy::BreakpointsAndTurningPoints) {
        Ok(w) => w,
        Err(e) => {
            return Verdict::Inconclusive {
                reason: e.to_string(),
            }
        }
    };
    let r = reduce(&word, opts);
    if r.word.is_empty() {
        Verdict::TrivialCertificate {
            letters: word.len(),
            cancellations: r.cancellations,
        }
    } else {
        Verdict::NotReduced {
            letters: word.len(),
            remaining: r.word.len(),
        }
    }
}
