use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::names::NameGen;
use super::SynthError;
use crate::pipeline::{CallEdge, EdgeKind, JumpRecord, NodeId, Role, RoleMap};
use crate::trace::{encode_args, encode_return, RecordKind, TraceLog, TraceRecord, TypeKind, TypedValue};

const EFFECT_LIB: &str = "libeffect.so";
const OTHER_LIBS: &[&str] = &["libutil.so", "libnet.so"];
const PID: u32 = 4242;
const PIPELINE_TID: u32 = 31;
const BACKGROUND_TIDS: &[u32] = &[2, 3, 5, 8, 13];

const BACKGROUND_SHORTIES: &[&str] = &[
    "V", "I", "Z", "VI", "VL", "ZL", "IL", "VII", "JJ", "VJI", "LLI", "DD", "FF", "VLI", "IJL", "ZIL", "VSB",
    "CC", "LIIL", "VFFL",
];
const NEUTRAL_TEXT: &[&str] = &[
    "GET /feed?page=2",
    "cache hit",
    "user tapped share",
    "settings saved",
    "retry after 30s",
    "{\"status\":\"ok\"}",
    "door=closed",
    "theme=dark",
];
const BACKGROUND_PAYLOADS: &[&str] = &[
    "{\"event\":\"tap\",\"x\":120,\"y\":44}",
    "{\"flags\":[0,1,1,0]}",
    "{\"status\":\"ok\",\"code\":200}",
    "{\"sizes\":[12,40,3]}",
    "{\"visible\":true}",
];

/// Position of a function in the planted pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    InputSource,
    Preprocess,
    ModelEntry,
    OutputRegister,
    LoggingCallback,
    JavaHandler,
    Sink,
}

impl Stage {
    pub const CHAIN: [Stage; 7] = [
        Stage::InputSource,
        Stage::Preprocess,
        Stage::ModelEntry,
        Stage::OutputRegister,
        Stage::LoggingCallback,
        Stage::JavaHandler,
        Stage::Sink,
    ];

    pub fn is_native(self) -> bool {
        matches!(self, Stage::Preprocess | Stage::ModelEntry | Stage::OutputRegister)
    }

    pub fn role(self) -> Option<Role> {
        match self {
            Stage::InputSource => Some(Role::InputSource),
            Stage::Preprocess => Some(Role::Preprocess),
            Stage::ModelEntry => Some(Role::ModelEntry),
            Stage::OutputRegister => Some(Role::OutputRegister),
            Stage::LoggingCallback => Some(Role::Callback),
            Stage::JavaHandler => None,
            Stage::Sink => Some(Role::Sink),
        }
    }

    fn readable(self) -> &'static str {
        match self {
            Stage::InputSource => "com.app.camera.FrameSource.onFrame",
            Stage::Preprocess => "effect_preprocess_frame",
            Stage::ModelEntry => "face_model_run",
            Stage::OutputRegister => "register_face_output",
            Stage::LoggingCallback => "com.app.effect.EffectCallback.onResult",
            Stage::JavaHandler => "com.app.effect.ResultHandler.handle",
            Stage::Sink => "com.app.net.Uploader.send",
        }
    }
}

fn default_topology() -> Vec<Stage> {
    Stage::CHAIN.to_vec()
}

fn default_frames() -> usize {
    1
}

/// What to plant in a synthetic trace. Read from JSON; omitted fields take
/// the minimal plan (one frame through the seven-stage chain, no noise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticAppPlan {
    #[serde(default)]
    pub n_background_functions: usize,
    #[serde(default)]
    pub n_background_calls: usize,
    #[serde(default = "default_topology")]
    pub pipeline_topology: Vec<Stage>,
    #[serde(default)]
    pub obfuscate_names: bool,
    #[serde(default = "default_frames")]
    pub n_frames: usize,
    /// One entry per indirect branch in the stage before the model entry,
    /// giving how many distinct model-entry destinations it reaches. Empty
    /// means the model is called directly and shows up in stacks.
    #[serde(default)]
    pub jump_branches: Vec<usize>,
    /// Plant a function outside the input's reach that also calls the model.
    #[serde(default)]
    pub second_feed: bool,
    /// Plant a consumer of the input that never reaches the model.
    #[serde(default)]
    pub side_branch: bool,
    #[serde(default)]
    pub seed: u64,
}

impl Default for SyntheticAppPlan {
    fn default() -> Self {
        serde_json::from_str("{}").unwrap()
    }
}

impl SyntheticAppPlan {
    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |m: &str| Err(SynthError::InvalidPlan(m.to_owned()));
        let models = self.pipeline_topology.iter().filter(|s| **s == Stage::ModelEntry).count();
        if models != 1 {
            return invalid("topology needs exactly one model_entry stage");
        }
        if !self.pipeline_topology.contains(&Stage::Sink) {
            return invalid("topology needs at least one sink stage");
        }
        if self.n_frames == 0 {
            return invalid("n_frames must be at least 1");
        }
        if self.n_background_calls > 0 && self.n_background_functions == 0 {
            return invalid("background calls need background functions");
        }
        if !self.jump_branches.is_empty() {
            if self.jump_branches.contains(&0) {
                return invalid("every jump branch needs at least one destination");
            }
            let m = self.model_index();
            if m == 0 || !self.pipeline_topology[m - 1].is_native() {
                return invalid("jump branches need a native stage right before the model entry");
            }
        }
        Ok(())
    }

    fn model_index(&self) -> usize {
        self.pipeline_topology.iter().position(|s| *s == Stage::ModelEntry).unwrap_or(0)
    }

    fn model_variants(&self) -> usize {
        self.jump_branches.iter().sum::<usize>().max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageNodes {
    pub stage: Stage,
    pub nodes: Vec<NodeId>,
}

/// What the generator planted, for checking detectors and the slicer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Every node of the planted input-to-sink slice, in topology order.
    pub pipeline_nodes: Vec<NodeId>,
    pub stages: Vec<StageNodes>,
    /// The function receiving the model output payload.
    pub anchor: Option<NodeId>,
    pub input_nodes: Vec<NodeId>,
    pub model_nodes: Vec<NodeId>,
    pub planted_edges: Vec<(NodeId, NodeId)>,
    /// Indices of the records carrying the planted payload.
    pub evidence_records: Vec<usize>,
    pub payloads: Vec<String>,
    /// Jumps from the pipeline's indirect branches.
    pub jumps: Vec<JumpRecord>,
    pub second_feed: Option<NodeId>,
    pub side_branch: Option<NodeId>,
}

impl GroundTruth {
    pub fn node_set(&self) -> BTreeSet<NodeId> {
        self.pipeline_nodes.iter().cloned().collect()
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTrace {
    pub log: TraceLog,
    pub jumps: Vec<JumpRecord>,
    pub static_edges: Vec<CallEdge>,
    pub roles: RoleMap,
    pub ground_truth: GroundTruth,
}

impl SyntheticTrace {
    /// Writes `trace.jsonl`, `jumps.json`, `static_edges.json`, `roles.json`
    /// and `ground_truth.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trace.jsonl"), self.log.to_jsonl())?;
        super::write_json(&dir.join("jumps.json"), &self.jumps)?;
        super::write_json(&dir.join("static_edges.json"), &self.static_edges)?;
        super::write_json(&dir.join("roles.json"), &self.roles)?;
        super::write_json(&dir.join("ground_truth.json"), &self.ground_truth)
    }
}

#[derive(Debug, Clone)]
struct Func {
    name: String,
    library: Option<String>,
    offset: Option<u64>,
}

impl Func {
    fn id(&self) -> NodeId {
        NodeId::new(&self.name, self.library.as_deref())
    }

    fn frame(&self) -> String {
        match (&self.library, self.offset) {
            (Some(lib), Some(off)) => format!("{}@{lib}+{off:#x}", self.name),
            (Some(lib), None) => format!("{}@{lib}", self.name),
            _ => self.name.clone(),
        }
    }

    fn record(&self, kind: RecordKind) -> TraceRecord {
        let mut r = TraceRecord::new(kind, self.name.clone(), 0);
        r.library = self.library.clone();
        r.offset = self.offset;
        r.pid = PID;
        r
    }
}

fn random_bytes(rng: &mut impl Rng, len: usize) -> Vec<u8> {
    let mut b = vec![0u8; len];
    rng.fill(&mut b[..]);
    // keep binary blobs from ever reading as text
    if let Some(first) = b.first_mut() {
        *first |= 0x80;
        *first &= 0xbf;
    }
    b
}

fn set_call(r: &mut TraceRecord, shorty: &str, args: &[TypedValue], ret: &TypedValue) {
    r.shorty = Some(shorty.to_owned());
    r.raw_args = encode_args(args, r.is_static).expect("generator emits valid layouts");
    r.raw_return = encode_return(ret).expect("generator emits valid layouts");
}

fn stack_of(funcs: &[&Func]) -> Option<Vec<String>> {
    Some(funcs.iter().map(|f| f.frame()).collect())
}

/// Generates a trace with one planted pipeline, executed `n_frames` times
/// and interleaved with background calls. Deterministic per plan.
pub fn generate_trace(plan: &SyntheticAppPlan) -> Result<SyntheticTrace, SynthError> {
    plan.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut names = NameGen::new(plan.obfuscate_names);

    // functions
    let model_idx = plan.model_index();
    let mut seen: BTreeMap<Stage, usize> = BTreeMap::new();
    let mut stage_funcs: Vec<Vec<Func>> = Vec::new();
    for &stage in &plan.pipeline_topology {
        let k = seen.entry(stage).or_insert(0);
        *k += 1;
        let base = if *k == 1 { stage.readable().to_owned() } else { format!("{}_{}", stage.readable(), k) };
        let count = if stage == Stage::ModelEntry { plan.model_variants() } else { 1 };
        let funcs = (0..count)
            .map(|v| {
                let readable = if count > 1 { format!("{base}_v{v}") } else { base.clone() };
                Func {
                    name: names.named(&mut rng, &readable, !stage.is_native()),
                    library: stage.is_native().then(|| EFFECT_LIB.to_owned()),
                    offset: None,
                }
            })
            .collect();
        stage_funcs.push(funcs);
    }
    let second_feed = plan.second_feed.then(|| Func {
        name: names.named(&mut rng, "com.app.sensor.MotionFeed.push", true),
        library: None,
        offset: None,
    });
    let side_branch = plan.side_branch.then(|| Func {
        name: names.named(&mut rng, "com.app.camera.ThumbnailCache.put", true),
        library: None,
        offset: None,
    });
    let mut background: Vec<Func> = (0..plan.n_background_functions)
        .map(|i| {
            let java = rng.random_bool(0.6);
            let library = (!java).then(|| {
                if rng.random_bool(0.3) {
                    EFFECT_LIB.to_owned()
                } else {
                    OTHER_LIBS.choose(&mut rng).unwrap().to_string()
                }
            });
            Func { name: names.background(&mut rng, java, i), library, offset: None }
        })
        .collect();

    // library layout: entries 0x400 apart in shuffled order
    let mut by_lib: BTreeMap<String, Vec<&mut Func>> = BTreeMap::new();
    for f in stage_funcs.iter_mut().flatten().chain(background.iter_mut()) {
        if let Some(lib) = f.library.clone() {
            by_lib.entry(lib).or_default().push(f);
        }
    }
    for funcs in by_lib.values_mut() {
        funcs.shuffle(&mut rng);
        for (slot, f) in funcs.iter_mut().enumerate() {
            f.offset = Some(0x1000 + slot as u64 * 0x400 + 4 * rng.random_range(0..16u64));
        }
    }
    drop(by_lib);

    // indirect branches into model variants
    let mut branches: Vec<(u64, Vec<usize>)> = Vec::new();
    if !plan.jump_branches.is_empty() {
        let pre = &stage_funcs[model_idx - 1][0];
        let mut next_variant = 0;
        for (b, &dests) in plan.jump_branches.iter().enumerate() {
            let offset = pre.offset.unwrap() + 0x20 + 8 * b as u64;
            branches.push((offset, (next_variant..next_variant + dests).collect()));
            next_variant += dests;
        }
    }
    let segmented = !branches.is_empty();

    // pipeline executions
    let mut pipeline: Vec<(TraceRecord, bool)> = Vec::new();
    let mut payloads = Vec::new();
    let mut jump_counts: BTreeMap<(u64, u64), u64> = BTreeMap::new();
    for frame in 0..plan.n_frames {
        let variant = if segmented {
            let (branch_offset, dests) = &branches[frame % branches.len()];
            let v = dests[(frame / branches.len()) % dests.len()];
            let dest = stage_funcs[model_idx][v].offset.unwrap();
            *jump_counts.entry((*branch_offset, dest)).or_insert(0) += 1;
            v
        } else {
            0
        };
        let chain: Vec<&Func> = stage_funcs
            .iter()
            .enumerate()
            .map(|(i, fs)| if i == model_idx { &fs[variant] } else { &fs[0] })
            .collect();
        for (k, &stage) in plan.pipeline_topology.iter().enumerate() {
            let start = if segmented && k >= model_idx { model_idx } else { 0 };
            let frames: Vec<&Func> = chain[start..=k].iter().rev().copied().collect();
            let f = chain[k];
            let (mut r, planted) = stage_record(stage, f, frame, variant, &mut rng);
            if planted {
                payloads.push(r.payload.clone().unwrap());
            }
            r.stack = stack_of(&frames);
            pipeline.push((r, planted));
            if k == 0 {
                if let Some(t) = &side_branch {
                    let mut r = t.record(RecordKind::QuickCode);
                    r.is_static = false;
                    set_call(&mut r, "VL", &[TypedValue::Pointer(random_bytes(&mut rng, 32))], &TypedValue::Void);
                    r.stack = stack_of(&[t, chain[0]]);
                    pipeline.push((r, false));
                }
            }
        }
        if let Some(sf) = &second_feed {
            let mut r = sf.record(RecordKind::QuickCode);
            r.is_static = false;
            set_call(&mut r, "VI", &[TypedValue::Int(frame as i32)], &TypedValue::Void);
            r.stack = stack_of(&[sf]);
            pipeline.push((r, false));
            let model = &stage_funcs[model_idx][0];
            let (mut r, _) = stage_record(Stage::ModelEntry, model, frame, 0, &mut rng);
            r.stack = stack_of(&[model, sf]);
            pipeline.push((r, false));
        }
    }

    // background noise
    let sink = plan
        .pipeline_topology
        .iter()
        .position(|s| *s == Stage::Sink)
        .map(|i| stage_funcs[i][0].clone());
    let java_bg: Vec<&Func> = background.iter().filter(|f| f.library.is_none()).collect();
    let mut noise = Vec::with_capacity(plan.n_background_calls);
    for _ in 0..plan.n_background_calls {
        noise.push(background_record(&background, &java_bg, sink.as_ref(), &mut rng));
    }

    // interleave, then stamp times in order
    let total = pipeline.len() + noise.len();
    let mut records = Vec::with_capacity(total);
    let mut evidence_records = Vec::new();
    let (mut pi, mut ni) = (pipeline.into_iter(), noise.into_iter());
    let (mut p_left, mut n_left) = (pi.len(), ni.len());
    let mut ts: u64 = 1_000_000_000;
    while p_left + n_left > 0 {
        let take_pipeline = rng.random_range(0..p_left + n_left) < p_left;
        let mut r = if take_pipeline {
            p_left -= 1;
            let (mut r, planted) = pi.next().unwrap();
            if planted {
                evidence_records.push(records.len());
            }
            r.tid = PIPELINE_TID;
            r
        } else {
            n_left -= 1;
            let mut r = ni.next().unwrap();
            r.tid = *BACKGROUND_TIDS.choose(&mut rng).unwrap();
            r
        };
        ts += rng.random_range(1_000..50_000);
        r.timestamp_ns = ts;
        records.push(r);
    }

    let pipeline_jumps: Vec<JumpRecord> = jump_counts
        .iter()
        .map(|(&(branch, dest), &n)| JumpRecord {
            library: EFFECT_LIB.to_owned(),
            branch_offset: branch,
            dest_offset: dest,
            observations: n,
        })
        .collect();
    let mut jumps = pipeline_jumps.clone();
    if !background.is_empty() {
        jumps.extend(noise_jumps(&background, &mut rng));
    }
    jumps.sort();

    let mut static_edges = Vec::new();
    let handler = plan.pipeline_topology.iter().rposition(|s| *s == Stage::JavaHandler);
    if let (Some(h), Some(sink)) = (handler, &sink) {
        static_edges.push(CallEdge {
            from: stage_funcs[h][0].id(),
            to: sink.id(),
            kind: EdgeKind::Static,
            support: 0,
        });
    }

    let mut roles = RoleMap::new();
    for (stage, funcs) in plan.pipeline_topology.iter().zip(&stage_funcs) {
        if let Some(role) = stage.role() {
            for f in funcs {
                roles.entry(f.id()).or_default().insert(role);
            }
        }
    }

    let mut planted_edges = Vec::new();
    for pair in stage_funcs.windows(2) {
        for a in &pair[0] {
            for b in &pair[1] {
                planted_edges.push((a.id(), b.id()));
            }
        }
    }
    let anchor = plan
        .pipeline_topology
        .iter()
        .position(|s| *s == Stage::LoggingCallback)
        .map(|i| stage_funcs[i][0].id());
    let ground_truth = GroundTruth {
        pipeline_nodes: stage_funcs.iter().flatten().map(Func::id).collect(),
        stages: plan
            .pipeline_topology
            .iter()
            .zip(&stage_funcs)
            .map(|(s, fs)| StageNodes { stage: *s, nodes: fs.iter().map(Func::id).collect() })
            .collect(),
        anchor,
        input_nodes: plan
            .pipeline_topology
            .iter()
            .zip(&stage_funcs)
            .filter(|(s, _)| **s == Stage::InputSource)
            .map(|(_, fs)| fs[0].id())
            .collect(),
        model_nodes: stage_funcs[model_idx].iter().map(Func::id).collect(),
        planted_edges,
        evidence_records,
        payloads,
        jumps: pipeline_jumps,
        second_feed: second_feed.as_ref().map(Func::id),
        side_branch: side_branch.as_ref().map(Func::id),
    };
    Ok(SyntheticTrace { log: TraceLog::from_records(records), jumps, static_edges, roles, ground_truth })
}

/// The record one pipeline stage emits; the flag marks the planted payload.
fn stage_record(stage: Stage, f: &Func, frame: usize, variant: usize, rng: &mut impl Rng) -> (TraceRecord, bool) {
    use TypedValue as T;
    let handle = |rng: &mut dyn rand::RngCore| T::Pointer(rng.next_u32().to_le_bytes().to_vec());
    match stage {
        Stage::InputSource => {
            let mut r = f.record(RecordKind::QuickCode);
            r.is_static = false;
            set_call(&mut r, "VL", &[T::Pointer(random_bytes(rng, 64))], &T::Void);
            (r, false)
        }
        Stage::Preprocess => {
            let mut r = f.record(RecordKind::JniTrampoline);
            set_call(&mut r, "VLII", &[handle(rng), T::Int(720), T::Int(1280)], &T::Void);
            (r, false)
        }
        Stage::ModelEntry => {
            let mut r = f.record(RecordKind::JniTrampoline);
            set_call(&mut r, "JLI", &[handle(rng), T::Int(variant as i32)], &T::Long(rng.random()));
            (r, false)
        }
        Stage::OutputRegister => {
            let mut r = f.record(RecordKind::JniTrampoline);
            set_call(&mut r, "VJ", &[T::Long(rng.random())], &T::Void);
            (r, false)
        }
        Stage::LoggingCallback => {
            let mut r = f.record(RecordKind::Callback);
            r.payload = Some(planted_payload(rng));
            (r, true)
        }
        Stage::JavaHandler => {
            let mut r = f.record(RecordKind::QuickCode);
            r.is_static = false;
            set_call(&mut r, "VI", &[T::Int(frame as i32)], &T::Void);
            (r, false)
        }
        Stage::Sink => {
            let mut r = f.record(RecordKind::QuickCode);
            r.is_static = false;
            set_call(&mut r, "ZL", &[T::Pointer(random_bytes(rng, 48))], &T::Bool(true));
            (r, false)
        }
    }
}

fn planted_payload(rng: &mut impl Rng) -> String {
    let mut unit = || (rng.random_range(50..950) as f64) / 1000.0;
    let bbox = [unit(), unit(), unit(), unit()];
    let boy_prob = unit();
    let age = rng.random_range(18..70);
    serde_json::json!({ "face_count": 1, "bbox": bbox, "age": age, "boy_prob": boy_prob }).to_string()
}

fn random_value(kind: TypeKind, trailing: bool, rng: &mut impl Rng) -> TypedValue {
    use TypedValue as T;
    match kind {
        TypeKind::Void => T::Void,
        TypeKind::Bool => T::Bool(rng.random()),
        TypeKind::Byte => T::Byte(rng.random()),
        TypeKind::Short => T::Short(rng.random()),
        TypeKind::Char => T::Char(rng.random()),
        TypeKind::Int => T::Int(rng.random()),
        TypeKind::Long => T::Long(rng.random()),
        TypeKind::Float => T::Float(rng.random()),
        TypeKind::Double => T::Double(rng.random()),
        TypeKind::Pointer if !trailing => T::Pointer(rng.next_u32().to_le_bytes().to_vec()),
        TypeKind::Pointer => {
            let blob = match rng.random_range(0..10) {
                0..=5 => {
                    let len = rng.random_range(0..96);
                    random_bytes(rng, len)
                }
                6 | 7 => NEUTRAL_TEXT.choose(rng).unwrap().as_bytes().to_vec(),
                8 => b"[0,1,1,0]".to_vec(),
                _ => b"[12,40,3]".to_vec(),
            };
            T::Pointer(blob)
        }
    }
}

fn background_record(all: &[Func], java: &[&Func], sink: Option<&Func>, rng: &mut impl Rng) -> TraceRecord {
    if let (Some(sink), true) = (sink, !java.is_empty() && rng.random_bool(0.01)) {
        let caller = java.choose(rng).unwrap();
        let mut r = sink.record(RecordKind::QuickCode);
        r.is_static = false;
        set_call(&mut r, "ZL", &[TypedValue::Pointer(random_bytes(rng, 24))], &TypedValue::Bool(true));
        r.stack = stack_of(&[sink, caller]);
        return r;
    }
    let f = all.choose(rng).unwrap();
    let mut r = if f.library.is_none() && rng.random_bool(0.05) {
        let mut r = f.record(RecordKind::Callback);
        r.payload = Some(BACKGROUND_PAYLOADS.choose(rng).unwrap().to_string());
        r
    } else {
        let kind = if f.library.is_some() { RecordKind::JniTrampoline } else { RecordKind::QuickCode };
        let mut r = f.record(kind);
        r.is_static = f.library.is_some() || rng.random_bool(0.3);
        let shorty = *BACKGROUND_SHORTIES.choose(rng).unwrap();
        let kinds: Vec<TypeKind> = shorty.chars().map(|c| TypeKind::from_char(c).unwrap()).collect();
        let n = kinds.len() - 1;
        let args: Vec<TypedValue> =
            kinds[1..].iter().enumerate().map(|(i, k)| random_value(*k, i + 1 == n, rng)).collect();
        let ret = random_value(kinds[0], true, rng);
        set_call(&mut r, shorty, &args, &ret);
        r
    };
    if rng.random_bool(0.5) {
        let depth = rng.random_range(1..=3);
        let mut frames = vec![f];
        frames.extend((0..depth).map(|_| all.choose(rng).unwrap()).filter(|c| c.name != f.name));
        r.stack = stack_of(&frames);
    }
    r
}

/// A few resolvable jumps between background natives, plus one that lands
/// below every function entry.
fn noise_jumps(background: &[Func], rng: &mut impl Rng) -> Vec<JumpRecord> {
    let mut out = Vec::new();
    for lib in OTHER_LIBS {
        let funcs: Vec<&Func> = background.iter().filter(|f| f.library.as_deref() == Some(*lib)).collect();
        if funcs.len() < 2 {
            continue;
        }
        for _ in 0..3 {
            let a = funcs.choose(rng).unwrap();
            let b = funcs.choose(rng).unwrap();
            out.push(JumpRecord {
                library: lib.to_string(),
                branch_offset: a.offset.unwrap() + 0x40,
                dest_offset: b.offset.unwrap(),
                observations: rng.random_range(1..20),
            });
        }
    }
    out.push(JumpRecord {
        library: OTHER_LIBS[0].to_owned(),
        branch_offset: 0x10,
        dest_offset: 0x20,
        observations: 1,
    });
    out
}
