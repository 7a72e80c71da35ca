use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use obsinfo::experiments::{
    cumulative_evidence_experiment, fusion_eval_experiment, generate_synthetic, mergeability_experiment,
};
use obsinfo::trec::{parse_qrels_file, parse_run_file, write_qrels, write_run};
use obsinfo::{
    evaluate_batch, report, ConstraintSuite, Dataset, Error, FusionMethod, GoldStandard, RankedList, Result, RunId,
    SuiteParams, SynthConfig, TopicId,
};

use crate::{
    Command, ConstraintsArgs, DataArgs, EvaluateArgs, ExperimentArgs, ExperimentName, FuseArgs, MuArgs, OutputArgs,
    SynthArgs,
};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Evaluate(a) => evaluate(a),
        Command::Fuse(a) => fuse(a),
        Command::Mu(a) => mu(a),
        Command::Constraints(a) => constraints(a),
        Command::Experiment(a) => experiment(a),
        Command::Synth(a) => synth(a),
    }
}

fn open_output(out: &OutputArgs) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Loads run files keyed by run id: the file's tag, else its stem.
fn load_runs(paths: &[PathBuf]) -> Result<BTreeMap<RunId, BTreeMap<TopicId, RankedList>>> {
    let mut runs = BTreeMap::new();
    for p in paths {
        let parsed = parse_run_file(p)?;
        let id = parsed.tag.clone().unwrap_or_else(|| stem(p));
        log::info!("run {id}: {} topics from {}", parsed.topics.len(), p.display());
        if runs.insert(id.clone(), parsed.topics).is_some() {
            return Err(Error::InvalidParameter(format!("run id {id} appears in more than one file")));
        }
    }
    Ok(runs)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

fn load_data(a: &DataArgs) -> Result<Dataset> {
    let runs = load_runs(&a.runs)?;
    let golds = parse_qrels_file(&a.qrels)?;
    let data = Dataset::from_parts(&runs, &golds, a.collection_size)?;
    for (t, topic) in &data.topics {
        log::info!("topic {t}: |D| = {}", topic.collection.size());
    }
    Ok(data)
}

type Grid = BTreeMap<(TopicId, RunId), RankedList>;

fn grid_of(data: &Dataset) -> (Grid, BTreeMap<TopicId, GoldStandard>, BTreeMap<TopicId, obsinfo::Collection>) {
    let mut runs = BTreeMap::new();
    let mut golds = BTreeMap::new();
    let mut colls = BTreeMap::new();
    for (t, topic) in &data.topics {
        for (r, l) in &topic.runs {
            runs.insert((t.clone(), r.clone()), l.clone());
        }
        golds.insert(t.clone(), topic.gold.clone());
        colls.insert(t.clone(), topic.collection.clone());
    }
    (runs, golds, colls)
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let (runs, golds, colls) = grid_of(&data);
    let reports =
        a.metrics.resolve().iter().map(|m| evaluate_batch(&runs, &golds, m, &colls)).collect::<Result<Vec<_>>>()?;
    report::write_metric_reports(open_output(&a.out)?, &reports, &colls)
}

fn fuse(a: FuseArgs) -> Result<()> {
    let method = FusionMethod::new(a.method, a.cutoff)?;
    let runs = load_runs(&a.runs)?;
    // fusion needs no gold: collections come from the runs alone
    let empty: BTreeMap<TopicId, GoldStandard> =
        runs.values().flat_map(|m| m.keys()).map(|t| (t.clone(), GoldStandard::new([]))).collect();
    let data = Dataset::from_parts(&runs, &empty, a.collection_size)?;
    let mut fused = BTreeMap::new();
    for (t, topic) in &data.topics {
        let inputs: Vec<(RunId, RankedList)> = topic.runs.iter().map(|(r, l)| (r.clone(), l.clone())).collect();
        fused.insert(t.clone(), method.fuse(&inputs, &topic.collection)?.fused);
    }
    let tag = a.tag.unwrap_or_else(|| a.method.to_string());
    write_run(open_output(&a.out)?, &fused, &tag)
}

fn mu(a: MuArgs) -> Result<()> {
    let data = load_data(&a.data)?;
    let (runs, golds, colls) = grid_of(&data);
    let mut scores = BTreeMap::new();
    for m in a.metrics.resolve() {
        let r = evaluate_batch(&runs, &golds, &m, &colls)?;
        scores.insert(m, r.per_topic);
    }
    let report = obsinfo::meta::metric_unanimity_with_mode(&scores, a.mu_mode.into())?;
    report::write_mu_report(open_output(&a.out)?, &report)
}

fn constraints(a: ConstraintsArgs) -> Result<()> {
    let mut params = SuiteParams::default();
    if let Some(d) = a.depths {
        params.depths = d;
    }
    if let Some(n) = a.deepth_n {
        params.deepness_threshold_n = n;
    }
    if let Some(n) = a.closeth_n {
        params.closeness_threshold_ns = n;
    }
    if let Some(t) = a.conf_tails {
        params.confidence_tails = t;
    }
    let suite = ConstraintSuite::generate(params)?;
    let reports = a.metrics.resolve().iter().map(|m| suite.check(m)).collect::<Result<Vec<_>>>()?;
    let out = open_output(&a.out)?;
    if a.cases {
        report::write_constraint_cases(out, &reports)
    } else {
        report::write_constraint_matrix(out, &reports)
    }
}

fn experiment(a: ExperimentArgs) -> Result<()> {
    let config = SynthConfig::from(&a.synth);
    let data = match &a.qrels {
        Some(q) => {
            let runs = load_runs(&a.runs)?;
            Dataset::from_parts(&runs, &parse_qrels_file(q)?, a.collection_size)?
        }
        None => generate_synthetic(&config)?,
    };
    let out = open_output(&a.out)?;
    match a.name {
        ExperimentName::Cumulative => {
            let recs = cumulative_evidence_experiment(&data, a.trials.unwrap_or(200), a.signals, config.seed)?;
            report::write_trials(out, &recs)
        }
        ExperimentName::Mergeability => {
            let recs = mergeability_experiment(&data, a.trials.unwrap_or(2000), a.beta, config.seed)?;
            report::write_trials(out, &recs)
        }
        ExperimentName::Fusion => report::write_fusion_eval(out, &fusion_eval_experiment(&data, a.beta, a.cutoff)?),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let data = generate_synthetic(&SynthConfig::from(&a.synth))?;
    let run_dir = a.out_dir.join("runs");
    fs::create_dir_all(&run_dir)?;
    let golds: BTreeMap<TopicId, GoldStandard> = data.topics.iter().map(|(t, x)| (t.clone(), x.gold.clone())).collect();
    write_qrels(BufWriter::new(File::create(a.out_dir.join("qrels.txt"))?), &golds)?;
    for (run, topics) in data.runs_by_system() {
        write_run(BufWriter::new(File::create(run_dir.join(format!("{run}.run")))?), &topics, &run)?;
    }
    Ok(())
}
