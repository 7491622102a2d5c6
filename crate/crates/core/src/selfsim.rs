//! The affine Weyl group as a self-similar group on the `d^n`-ary tree:
//! word actions, wreath recursions and finite automata.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::monodromy::{algebraic_action, encode_label, wreath_digit_step, LevelAction};
use crate::rootsys::{AffineElement, WeylElement};

pub const DEFAULT_STATE_CAP: usize = 10_000;

/// A word over `{0..d-1}^n`; the first letter is the least significant digit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeWord {
    pub d: u64,
    pub n: usize,
    pub letters: Vec<Vec<i64>>,
}

impl TreeWord {
    pub fn new(d: u64, n: usize, letters: Vec<Vec<i64>>) -> Result<Self> {
        for l in &letters {
            if l.len() != n || l.iter().any(|&x| x < 0 || x >= d as i64) {
                return Err(Error::AlphabetMismatch(format!("letter {l:?} is not in {{0..{}}}^{n}", d - 1)));
            }
        }
        Ok(TreeWord { d, n, letters })
    }

    /// Digit string, `n` digits per letter (e.g. `"0110"` for two letters of rank 2).
    pub fn parse(s: &str, d: u64, n: usize) -> Result<Self> {
        let digits: Vec<i64> = s
            .chars()
            .map(|c| c.to_digit(10).map(i64::from).ok_or_else(|| Error::Parse(format!("not a digit: {c:?}"))))
            .collect::<Result<_>>()?;
        if n == 0 || digits.len() % n != 0 {
            return Err(Error::AlphabetMismatch(format!("word length {} is not a multiple of {n}", digits.len())));
        }
        TreeWord::new(d, n, digits.chunks(n).map(|c| c.to_vec()).collect())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The coroot label `sum_j d^j letter_j`.
    pub fn to_label(&self) -> Vec<i64> {
        (0..self.n)
            .map(|i| self.letters.iter().rev().fold(0i64, |acc, l| acc * self.d as i64 + l[i]))
            .collect()
    }

    pub fn index(&self) -> usize {
        encode_label(&self.to_label(), self.d, self.letters.len() as u32)
    }
}

impl std::fmt::Display for TreeWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for l in &self.letters {
            for x in l {
                write!(f, "{x}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TreeAutomorphism {
    pub state: AffineElement,
    pub d: u64,
}

impl TreeAutomorphism {
    pub fn new(state: AffineElement, d: u64) -> Self {
        TreeAutomorphism { state, d }
    }

    pub fn rank(&self) -> usize {
        self.state.rank()
    }

    pub fn compose(&self, other: &TreeAutomorphism) -> TreeAutomorphism {
        TreeAutomorphism { state: self.state.compose(&other.state), d: self.d }
    }

    pub fn level_action(&self, k: u32) -> Result<LevelAction> {
        algebraic_action(&self.state, self.d, k)
    }
}

/// Image of `w`, plus the state left after the last letter.
pub fn act_on_word_with_state(g: &TreeAutomorphism, w: &TreeWord) -> Result<(TreeWord, AffineElement)> {
    if g.d != w.d || g.rank() != w.n {
        return Err(Error::AlphabetMismatch(format!(
            "automorphism of the ({}, {}) tree applied to a ({}, {}) word",
            g.d,
            g.rank(),
            w.d,
            w.n
        )));
    }
    let mut state = g.state.clone();
    let mut out = Vec::with_capacity(w.len());
    for letter in &w.letters {
        let (image, child) = wreath_digit_step(&state, g.d, letter);
        out.push(image);
        state = child;
    }
    Ok((TreeWord { d: w.d, n: w.n, letters: out }, state))
}

pub fn act_on_word(g: &TreeAutomorphism, w: &TreeWord) -> Result<TreeWord> {
    act_on_word_with_state(g, w).map(|(w, _)| w)
}

fn letter_index(letter: &[i64], d: u64) -> usize {
    letter.iter().rev().fold(0usize, |acc, &x| acc * d as usize + x as usize)
}

fn letter_from_index(mut i: usize, d: u64, n: usize) -> Vec<i64> {
    (0..n)
        .map(|_| {
            let x = (i % d as usize) as i64;
            i /= d as usize;
            x
        })
        .collect()
}

/// Finite automaton: `transitions[s][a] = (b, s')` means state `s` reads letter `a`,
/// writes `b` and continues as `s'`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Automaton {
    pub d: u64,
    pub n: usize,
    pub states: Vec<AffineElement>,
    pub transitions: Vec<Vec<(usize, usize)>>,
    pub generators: Vec<usize>,
}

impl Automaton {
    pub fn alphabet_size(&self) -> usize {
        (self.d as usize).pow(self.n as u32)
    }

    /// Runs the table on a word starting from state `s`.
    pub fn run(&self, s: usize, w: &TreeWord) -> TreeWord {
        let mut state = s;
        let mut out = Vec::with_capacity(w.len());
        for l in &w.letters {
            let (b, next) = self.transitions[state][letter_index(l, self.d)];
            out.push(letter_from_index(b, self.d, self.n));
            state = next;
        }
        TreeWord { d: self.d, n: self.n, letters: out }
    }
}

/// Closure of `{g}` under taking children.
pub fn reachable_states(g: &TreeAutomorphism, cap: usize) -> Result<Automaton> {
    build_automaton(std::slice::from_ref(g), cap)
}

pub fn build_automaton(gens: &[TreeAutomorphism], cap: usize) -> Result<Automaton> {
    let Some(first) = gens.first() else {
        return Err(Error::Invalid("no generators".into()));
    };
    let (d, n) = (first.d, first.rank());
    if gens.iter().any(|g| g.d != d || g.rank() != n) {
        return Err(Error::AlphabetMismatch("generators act on different trees".into()));
    }
    let alphabet = (d as usize).pow(n as u32);
    let mut index: HashMap<AffineElement, usize> = HashMap::new();
    let mut states: Vec<AffineElement> = Vec::new();
    let mut generators = Vec::new();
    let mut intern = |s: &AffineElement, states: &mut Vec<AffineElement>| -> Result<usize> {
        if let Some(&i) = index.get(s) {
            return Ok(i);
        }
        if states.len() >= cap {
            return Err(Error::CapExceeded { what: "automaton states", estimated: states.len() as u128 + 1, cap: cap as u128 });
        }
        index.insert(s.clone(), states.len());
        states.push(s.clone());
        Ok(states.len() - 1)
    };
    for g in gens {
        generators.push(intern(&g.state, &mut states)?);
    }
    let mut transitions: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let s = states[next].clone();
        let mut row = Vec::with_capacity(alphabet);
        for a in 0..alphabet {
            let (image, child) = wreath_digit_step(&s, d, &letter_from_index(a, d, n));
            row.push((letter_index(&image, d), intern(&child, &mut states)?));
        }
        transitions.push(row);
        next += 1;
    }
    Ok(Automaton { d, n, states, transitions, generators })
}

/// Agreement on every word of length `k` (hence on all shorter words).
pub fn element_equal_up_to_level(g1: &TreeAutomorphism, g2: &TreeAutomorphism, k: u32) -> Result<bool> {
    if g1.d != g2.d || g1.rank() != g2.rank() {
        return Err(Error::AlphabetMismatch("different trees".into()));
    }
    Ok(g1.level_action(k)? == g2.level_action(k)?)
}

pub fn order_on_level(g: &TreeAutomorphism, k: u32) -> Result<u128> {
    Ok(g.level_action(k)?.order())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Text,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    t: Vec<i64>,
    w_matrix: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct AutomatonJson {
    d: u64,
    rank: usize,
    alphabet_size: usize,
    states: Vec<StateJson>,
    transitions: Vec<[usize; 4]>,
    generators: Vec<usize>,
}

/// Renders the table; `names` label the generator states in text output.
pub fn export_automaton(a: &Automaton, format: ExportFormat, names: &[String]) -> String {
    match format {
        ExportFormat::Json => {
            let j = AutomatonJson {
                d: a.d,
                rank: a.n,
                alphabet_size: a.alphabet_size(),
                states: a.states.iter().map(|s| StateJson { t: s.t.clone(), w_matrix: s.w.coroot.rows() }).collect(),
                transitions: a
                    .transitions
                    .iter()
                    .enumerate()
                    .flat_map(|(s, row)| row.iter().enumerate().map(move |(l, &(b, c))| [s, l, b, c]))
                    .collect(),
                generators: a.generators.clone(),
            };
            serde_json::to_string_pretty(&j).expect("automaton serializes")
        }
        ExportFormat::Text => {
            let mut out = String::new();
            let mut label: BTreeMap<usize, String> = BTreeMap::new();
            for (i, &g) in a.generators.iter().enumerate() {
                label.entry(g).or_insert_with(|| names.get(i).cloned().unwrap_or_else(|| format!("g{i}")));
            }
            let name = |s: usize| label.get(&s).cloned().unwrap_or_else(|| format!("q{s}"));
            let _ = writeln!(out, "alphabet: {} letters (d = {}, rank {})", a.alphabet_size(), a.d, a.n);
            for (s, st) in a.states.iter().enumerate() {
                let _ = writeln!(out, "{}: t = {:?}, w = {:?}", name(s), st.t, st.w.coroot.rows());
            }
            for (s, row) in a.transitions.iter().enumerate() {
                let perm: Vec<String> = row.iter().map(|(b, _)| b.to_string()).collect();
                let children: Vec<String> = row.iter().map(|&(_, c)| name(c)).collect();
                let _ = writeln!(out, "{} = [{}]({})", name(s), perm.join(" "), children.join(", "));
            }
            out
        }
    }
}

/// Inverse of a finite-order integer matrix, as a power of itself.
fn finite_order_inverse(m: &IntMatrix) -> Option<IntMatrix> {
    let mut p = m.clone();
    let mut prev = IntMatrix::identity(m.dim());
    for _ in 0..1000 {
        if p.is_identity() {
            return Some(prev);
        }
        prev = p.clone();
        p = p.mul(m);
    }
    None
}

pub fn import_automaton_json(text: &str) -> Result<Automaton> {
    let j: AutomatonJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let alphabet = (j.d as usize).pow(j.rank as u32);
    if alphabet != j.alphabet_size {
        return Err(Error::AlphabetMismatch(format!("alphabet size {} != d^rank = {alphabet}", j.alphabet_size)));
    }
    let mut states = Vec::new();
    for s in &j.states {
        let coroot = IntMatrix::from_rows(&s.w_matrix);
        let inv = finite_order_inverse(&coroot).ok_or_else(|| Error::Invalid("state matrix has infinite order".into()))?;
        states.push(AffineElement { t: s.t.clone(), w: WeylElement { weight: inv.transpose(), coroot } });
    }
    let mut transitions = vec![vec![(usize::MAX, usize::MAX); alphabet]; states.len()];
    for &[s, l, b, c] in &j.transitions {
        if s >= states.len() || c >= states.len() || l >= alphabet || b >= alphabet {
            return Err(Error::Invalid(format!("transition {:?} out of range", [s, l, b, c])));
        }
        transitions[s][l] = (b, c);
    }
    if transitions.iter().flatten().any(|&(b, _)| b == usize::MAX) {
        return Err(Error::Invalid("incomplete transition table".into()));
    }
    Ok(Automaton { d: j.d, n: j.rank, states, transitions, generators: j.generators })
}

#[derive(Clone, Debug, Serialize)]
pub struct FaithfulnessReport {
    pub word_length: usize,
    pub level: u32,
    pub words: usize,
    pub distinct_elements: usize,
    pub distinct_actions: usize,
    /// Smallest level separating all distinct elements, if within range.
    pub separating_level: Option<u32>,
    pub passed: bool,
}

/// Evaluates every generator word of length `<= max_len` exactly, then checks that
/// distinct group elements act differently on level `level`.
pub fn faithfulness_sweep(gens: &[TreeAutomorphism], max_len: usize, level: u32) -> Result<FaithfulnessReport> {
    let Some(first) = gens.first() else {
        return Err(Error::Invalid("no generators".into()));
    };
    let n = first.rank();
    let mut elements: HashSet<AffineElement> = HashSet::new();
    let mut frontier = vec![AffineElement::identity(n)];
    elements.insert(AffineElement::identity(n));
    let mut words = 1usize;
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for g in gens {
                let x = w.compose(&g.state);
                words += 1;
                elements.insert(x.clone());
                next.push(x);
            }
        }
        frontier = next;
    }
    let mut separating_level = None;
    let mut distinct_actions = 0;
    for k in 1..=level {
        let actions: HashSet<Vec<u32>> = elements
            .iter()
            .map(|e| algebraic_action(e, first.d, k).map(|a| a.perm))
            .collect::<Result<_>>()?;
        distinct_actions = actions.len();
        if actions.len() == elements.len() {
            separating_level = Some(k);
            break;
        }
    }
    Ok(FaithfulnessReport {
        word_length: max_len,
        level,
        words,
        distinct_elements: elements.len(),
        distinct_actions,
        separating_level,
        passed: separating_level.is_some(),
    })
}
