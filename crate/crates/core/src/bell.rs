//! Bell scenarios as contextuality scenarios.
//!
//! Multipartite scenarios are built as left-associated Foulis-Randall
//! products of single-party scenarios. Under that construction the edge
//! normalizations of the product hypergraph are exactly normalization plus
//! nonsignaling of the corresponding behavior table.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactmath::rational::{format_rational, is_probability, parse_rational, rat};
use crate::exactmath::Rational;
use crate::scenario::{validate_model, ContextualityScenario, ProbabilisticModel};

/// Outcome counts indexed by party, then setting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BellStructure {
    outcomes: Vec<Vec<usize>>,
}

impl BellStructure {
    pub fn new(outcomes: Vec<Vec<usize>>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Unsupported("a Bell structure needs at least one party".into()));
        }
        for (i, party) in outcomes.iter().enumerate() {
            if party.is_empty() {
                return Err(Error::Unsupported(format!("party {i} has no settings")));
            }
            if let Some(x) = party.iter().position(|&n| n == 0) {
                return Err(Error::Unsupported(format!("party {i} setting {x} has no outcomes")));
            }
        }
        Ok(Self { outcomes })
    }

    /// Every party with the same number of settings and outcomes.
    pub fn uniform(parties: usize, settings: usize, outcomes: usize) -> Result<Self> {
        Self::new(vec![vec![outcomes; settings]; parties])
    }

    pub fn chsh() -> Self {
        Self::uniform(2, 2, 2).expect("valid")
    }

    /// Parses `"2,2;1,2"`: parties separated by `;`, per-setting outcome
    /// counts separated by `,`.
    pub fn parse(text: &str) -> Result<Self> {
        let outcomes = text
            .split(';')
            .map(|party| {
                party
                    .split(',')
                    .map(|n| n.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad outcome count {n:?} in {text:?}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(outcomes)
    }

    pub fn parties(&self) -> usize {
        self.outcomes.len()
    }

    pub fn settings(&self, party: usize) -> usize {
        self.outcomes[party].len()
    }

    pub fn outcomes(&self, party: usize, setting: usize) -> usize {
        self.outcomes[party][setting]
    }

    pub fn outcome_counts(&self) -> &[Vec<usize>] {
        &self.outcomes
    }

    /// All joint settings, lexicographic with party 0 outermost.
    pub fn joint_settings(&self) -> Vec<Vec<usize>> {
        cartesian(&self.outcomes.iter().map(Vec::len).collect::<Vec<_>>())
    }

    pub fn joint_outcomes(&self, settings: &[usize]) -> Vec<Vec<usize>> {
        let radices: Vec<usize> = settings.iter().enumerate().map(|(i, &x)| self.outcomes[i][x]).collect();
        cartesian(&radices)
    }

    fn is_valid_setting(&self, x: &[usize]) -> bool {
        x.len() == self.parties() && x.iter().enumerate().all(|(i, &xi)| xi < self.settings(i))
    }

    fn is_valid_outcome(&self, x: &[usize], a: &[usize]) -> bool {
        a.len() == self.parties() && a.iter().enumerate().all(|(i, &ai)| ai < self.outcomes[i][x[i]])
    }

    pub fn to_text(&self) -> String {
        self.outcomes
            .iter()
            .map(|p| p.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join(";")
    }
}

fn cartesian(radices: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &r in radices {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..r).map(move |k| {
                    let mut next = prefix.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

/// Joint outcome and joint setting attached to a Bell-scenario vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BellVertex {
    pub outcomes: Vec<usize>,
    pub settings: Vec<usize>,
}

impl BellVertex {
    /// `"a1,a2|x1,x2"`.
    pub fn label(&self) -> String {
        let join = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        format!("{}|{}", join(&self.outcomes), join(&self.settings))
    }
}

/// Bijection between vertex indices of a Bell scenario and `(a|x)` pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLabeling {
    vertices: Vec<BellVertex>,
    index: BTreeMap<BellVertex, usize>,
}

impl VertexLabeling {
    fn new(vertices: Vec<BellVertex>) -> Self {
        let index = vertices.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
        Self { vertices, index }
    }

    pub fn vertex(&self, v: usize) -> &BellVertex {
        &self.vertices[v]
    }

    pub fn index_of(&self, outcomes: &[usize], settings: &[usize]) -> Option<usize> {
        let key = BellVertex {
            outcomes: outcomes.to_vec(),
            settings: settings.to_vec(),
        };
        self.index.get(&key).copied()
    }

    pub fn vertices(&self) -> &[BellVertex] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Vertex `k` of a product is the pair `(k / |V_B|, k % |V_B|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductLabeling {
    pub pairs: Vec<(usize, usize)>,
}

pub fn single_party_scenario(settings: usize, outcomes: usize) -> Result<ContextualityScenario> {
    single_party_scenario_with(&vec![outcomes; settings])
}

/// One disjoint edge `{(a|x) : a}` per setting `x`; labels `"a|x"`.
pub fn single_party_scenario_with(outcomes_per_setting: &[usize]) -> Result<ContextualityScenario> {
    if outcomes_per_setting.is_empty() || outcomes_per_setting.contains(&0) {
        return Err(Error::Unsupported("settings and outcomes must be at least 1".into()));
    }
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    for (x, &n) in outcomes_per_setting.iter().enumerate() {
        let start = labels.len();
        for a in 0..n {
            labels.push(format!("{a}|{x}"));
        }
        edges.push((start..start + n).collect());
    }
    Ok(ContextualityScenario::from_indices(labels, edges))
}

/// Foulis-Randall product. Edges are, for each edge `e` of one factor and
/// each choice function `f` from `e` to edges of the other, the union of
/// `{v} x f(v)` over `v` in `e`; taken in both directions, duplicates
/// collapsed. Product labels are `"{a}/{b}"`.
pub fn fr_product(a: &ContextualityScenario, b: &ContextualityScenario) -> (ContextualityScenario, ProductLabeling) {
    let nb = b.num_vertices();
    let pairs: Vec<(usize, usize)> = (0..a.num_vertices()).flat_map(|v| (0..nb).map(move |w| (v, w))).collect();
    let labels = pairs.iter().map(|&(v, w)| format!("{}/{}", a.label(v), b.label(w))).collect();

    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut push = |mut e: Vec<usize>| {
        e.sort_unstable();
        if !edges.contains(&e) {
            edges.push(e);
        }
    };
    for ea in a.edges() {
        for choice in cartesian(&vec![b.num_edges(); ea.len()]) {
            let e = ea
                .iter()
                .zip(&choice)
                .flat_map(|(&v, &f)| b.edges()[f].iter().map(move |&w| v * nb + w))
                .collect();
            push(e);
        }
    }
    for eb in b.edges() {
        for choice in cartesian(&vec![a.num_edges(); eb.len()]) {
            let e = eb
                .iter()
                .zip(&choice)
                .flat_map(|(&w, &f)| a.edges()[f].iter().map(move |&v| v * nb + w))
                .collect();
            push(e);
        }
    }
    (ContextualityScenario::from_indices(labels, edges), ProductLabeling { pairs })
}

/// N-party Bell scenario by left-associated products, relabelled to
/// `"a1,..,aN|x1,..,xN"`.
pub fn bell_scenario(structure: &BellStructure) -> Result<(ContextualityScenario, VertexLabeling)> {
    let factors = (0..structure.parties())
        .map(|i| single_party_scenario_with(&structure.outcomes[i]))
        .collect::<Result<Vec<_>>>()?;
    // Single-party vertex k corresponds to (a|x) in setting-major order.
    let local: Vec<Vec<(usize, usize)>> = (0..structure.parties())
        .map(|i| {
            (0..structure.settings(i))
                .flat_map(|x| (0..structure.outcomes(i, x)).map(move |a| (a, x)))
                .collect()
        })
        .collect();

    let mut current = factors[0].clone();
    let mut tuples: Vec<Vec<usize>> = (0..current.num_vertices()).map(|v| vec![v]).collect();
    for factor in &factors[1..] {
        let (product, labeling) = fr_product(&current, factor);
        tuples = labeling
            .pairs
            .iter()
            .map(|&(v, w)| {
                let mut t = tuples[v].clone();
                t.push(w);
                t
            })
            .collect();
        current = product;
    }

    let vertices: Vec<BellVertex> = tuples
        .iter()
        .map(|t| {
            let (outcomes, settings) = t.iter().enumerate().map(|(i, &k)| local[i][k]).unzip();
            BellVertex { outcomes, settings }
        })
        .collect();
    let labels = vertices.iter().map(BellVertex::label).collect();
    let scenario = ContextualityScenario::from_indices(labels, current.edges().to_vec());
    Ok((scenario, VertexLabeling::new(vertices)))
}

/// Conditional table `p(a|x)` over all joint settings and outcomes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BellBehavior {
    structure: BellStructure,
    table: BTreeMap<(Vec<usize>, Vec<usize>), Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BehaviorViolation {
    OutOfRange { settings: Vec<usize>, outcomes: Vec<usize>, value: Rational },
    Normalization { settings: Vec<usize>, sum: Rational },
    /// Summing out `party` gives different marginals for the others at
    /// `outcomes` (indexed with the party removed) under settings `first`
    /// versus `second`, which differ only in that party's setting.
    Signaling {
        party: usize,
        outcomes: Vec<usize>,
        first: Vec<usize>,
        second: Vec<usize>,
        first_value: Rational,
        second_value: Rational,
    },
}

impl fmt::Display for BehaviorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::OutOfRange { settings, outcomes, value } => {
                write!(f, "p({outcomes:?}|{settings:?}) = {} is not in [0,1]", format_rational(value))
            }
            Self::Normalization { settings, sum } => {
                write!(f, "outcomes for settings {settings:?} sum to {}", format_rational(sum))
            }
            Self::Signaling {
                party,
                outcomes,
                first,
                second,
                first_value,
                second_value,
            } => write!(
                f,
                "marginal of the parties other than {party} at outcomes {outcomes:?} is {} under settings {first:?} but {} under {second:?}",
                format_rational(first_value),
                format_rational(second_value)
            ),
        }
    }
}

impl BellBehavior {
    /// Requires an entry for every `(x, a)` pair and nothing else.
    pub fn new(structure: BellStructure, table: BTreeMap<(Vec<usize>, Vec<usize>), Rational>) -> Result<Self> {
        let expected: usize = structure.joint_settings().iter().map(|x| structure.joint_outcomes(x).len()).sum();
        for (x, a) in table.keys() {
            if !structure.is_valid_setting(x) || !structure.is_valid_outcome(x, a) {
                return Err(Error::Parse(format!("table entry {x:?};{a:?} outside the structure")));
            }
        }
        if table.len() != expected {
            return Err(Error::Parse(format!("table has {} entries, structure needs {expected}", table.len())));
        }
        Ok(Self { structure, table })
    }

    pub fn from_fn(structure: BellStructure, f: impl Fn(&[usize], &[usize]) -> Rational) -> Self {
        let mut table = BTreeMap::new();
        for x in structure.joint_settings() {
            for a in structure.joint_outcomes(&x) {
                let v = f(&a, &x);
                table.insert((x.clone(), a), v);
            }
        }
        Self { structure, table }
    }

    pub fn structure(&self) -> &BellStructure {
        &self.structure
    }

    /// `p(outcomes | settings)`.
    pub fn get(&self, outcomes: &[usize], settings: &[usize]) -> &Rational {
        &self.table[&(settings.to_vec(), outcomes.to_vec())]
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[usize], &[usize], &Rational)> {
        self.table.iter().map(|((x, a), v)| (x.as_slice(), a.as_slice(), v))
    }

    pub fn check_normalized(&self) -> Option<BehaviorViolation> {
        for ((x, a), v) in &self.table {
            if !is_probability(v) {
                return Some(BehaviorViolation::OutOfRange {
                    settings: x.clone(),
                    outcomes: a.clone(),
                    value: v.clone(),
                });
            }
        }
        for x in self.structure.joint_settings() {
            let sum = self
                .structure
                .joint_outcomes(&x)
                .iter()
                .fold(Rational::zero(), |acc, a| acc + self.get(a, &x));
            if !sum.is_one() {
                return Some(BehaviorViolation::Normalization { settings: x, sum });
            }
        }
        None
    }

    /// Marginal of all parties except `party`, at reduced outcomes `rest`
    /// under full settings `x`.
    fn marginal_without(&self, party: usize, rest: &[usize], x: &[usize]) -> Rational {
        let n = self.structure.outcomes(party, x[party]);
        (0..n).fold(Rational::zero(), |acc, ai| {
            let mut a = rest.to_vec();
            a.insert(party, ai);
            acc + self.get(&a, x)
        })
    }

    /// First violated nonsignaling equality. Checking that each single
    /// party can be summed out independently of its own setting implies
    /// the condition for every subset of parties.
    pub fn check_nonsignaling(&self) -> Option<BehaviorViolation> {
        let s = &self.structure;
        for party in 0..s.parties() {
            for x in s.joint_settings() {
                if x[party] != 0 {
                    continue;
                }
                let mut radices: Vec<usize> = (0..s.parties()).map(|i| s.outcomes(i, x[i])).collect();
                radices.remove(party);
                for rest in cartesian(&radices) {
                    let base = self.marginal_without(party, &rest, &x);
                    for k in 1..s.settings(party) {
                        let mut y = x.clone();
                        y[party] = k;
                        let other = self.marginal_without(party, &rest, &y);
                        if other != base {
                            return Some(BehaviorViolation::Signaling {
                                party,
                                outcomes: rest,
                                first: x,
                                second: y,
                                first_value: base,
                                second_value: other,
                            });
                        }
                    }
                }
            }
        }
        None
    }

    /// Single-party marginal `p_i(a | x)`, reading the other parties at
    /// setting 0. Well defined for nonsignaling behaviors.
    pub fn local_marginal(&self, party: usize, setting: usize, outcome: usize) -> Rational {
        let s = &self.structure;
        let mut x = vec![0; s.parties()];
        x[party] = setting;
        s.joint_outcomes(&x)
            .iter()
            .filter(|a| a[party] == outcome)
            .fold(Rational::zero(), |acc, a| acc + self.get(a, &x))
    }
}

/// Relabels a normalized, nonsignaling behavior as a model on
/// [`bell_scenario`]'s hypergraph.
pub fn behavior_to_model(structure: &BellStructure, behavior: &BellBehavior) -> Result<ProbabilisticModel> {
    if behavior.structure() != structure {
        return Err(Error::Dimension("behavior structure differs from the requested structure".into()));
    }
    if let Some(v) = behavior.check_normalized() {
        return Err(Error::InvalidModel(v.to_string()));
    }
    if let Some(v) = behavior.check_nonsignaling() {
        return Err(Error::Signaling(v.to_string()));
    }
    let (_, labeling) = bell_scenario(structure)?;
    let values = labeling
        .vertices()
        .iter()
        .map(|bv| behavior.get(&bv.outcomes, &bv.settings).clone())
        .collect();
    Ok(ProbabilisticModel::new(values))
}

/// Inverse of [`behavior_to_model`]; the model must be valid on the Bell
/// scenario.
pub fn model_to_behavior(structure: &BellStructure, model: &ProbabilisticModel) -> Result<BellBehavior> {
    let (h, labeling) = bell_scenario(structure)?;
    let report = validate_model(&h, model);
    if !report.is_empty() {
        let msgs: Vec<String> = report.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidModel(msgs.join("; ")));
    }
    Ok(BellBehavior::from_fn(structure.clone(), |a, x| {
        model.value(labeling.index_of(a, x).expect("labeling is total")).clone()
    }))
}

/// `p(ab|xy) = 1/2` if `a xor b = x and y`, else 0. Only for two parties
/// with two binary settings each.
pub fn pr_box(structure: &BellStructure) -> Result<BellBehavior> {
    if structure != &BellStructure::chsh() {
        return Err(Error::Unsupported(format!(
            "the PR box needs two parties with two binary settings, got {}",
            structure.to_text()
        )));
    }
    Ok(BellBehavior::from_fn(structure.clone(), |a, x| {
        if (a[0] ^ a[1]) == (x[0] & x[1]) {
            rat(1, 2)
        } else {
            Rational::zero()
        }
    }))
}

/// Local factors `factors[party][setting][outcome]` when the table is the
/// product of its single-party marginals.
pub type LocalFactors = Vec<Vec<Vec<Rational>>>;

pub fn is_product_behavior(structure: &BellStructure, behavior: &BellBehavior) -> Option<LocalFactors> {
    let factors: LocalFactors = (0..structure.parties())
        .map(|i| {
            (0..structure.settings(i))
                .map(|x| (0..structure.outcomes(i, x)).map(|a| behavior.local_marginal(i, x, a)).collect())
                .collect()
        })
        .collect();
    for (x, a, v) in behavior.entries() {
        let product = (0..structure.parties()).fold(Rational::one(), |acc, i| acc * &factors[i][x[i]][a[i]]);
        if &product != v {
            return None;
        }
    }
    Some(factors)
}

/// On-disk behavior shape. Table keys are `"x1,..,xN;a1,..,aN"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BehaviorFile {
    pub parties: usize,
    pub settings: Vec<usize>,
    pub outcomes: Vec<Vec<usize>>,
    pub table: BTreeMap<String, String>,
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn split_indices(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad index {t:?}"))))
        .collect()
}

impl BellBehavior {
    pub fn to_file(&self) -> BehaviorFile {
        let s = &self.structure;
        BehaviorFile {
            parties: s.parties(),
            settings: (0..s.parties()).map(|i| s.settings(i)).collect(),
            outcomes: s.outcomes.clone(),
            table: self
                .table
                .iter()
                .map(|((x, a), v)| (format!("{};{}", join(x), join(a)), format_rational(v)))
                .collect(),
        }
    }

    pub fn from_file(file: &BehaviorFile) -> Result<Self> {
        if file.parties != file.outcomes.len() || file.settings.len() != file.parties {
            return Err(Error::Parse("parties, settings and outcomes disagree in length".into()));
        }
        for (i, (&n, o)) in file.settings.iter().zip(&file.outcomes).enumerate() {
            if n != o.len() {
                return Err(Error::Parse(format!("party {i}: {n} settings but {} outcome counts", o.len())));
            }
        }
        let structure = BellStructure::new(file.outcomes.clone())?;
        let mut table = BTreeMap::new();
        for (key, value) in &file.table {
            let (x, a) = key
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("table key {key:?} lacks ';'")))?;
            let entry = (split_indices(x)?, split_indices(a)?);
            if table.insert(entry, parse_rational(value)?).is_some() {
                return Err(Error::Parse(format!("duplicate table key {key:?}")));
            }
        }
        Self::new(structure, table)
    }
}
