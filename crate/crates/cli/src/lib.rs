//! Command-line front end: reads and writes JSON documents and runs the
//! separability tests on them.

pub mod document;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use sepkit::criteria::{decide, default_catalog, ppt_check, semisep_report, CutReport, Verdict};
use sepkit::maps::{apply_map, eval_witness, map_from_witness, Witness};
use sepkit::product_opt::{
    certify, seesaw_extremize, Budget, Direction, GridSettings, OptResult, SeesawSettings,
};
use sepkit::states::{
    density_from_pure, max_entangled_vector, named_operator, random_separable, werner_state,
    MultipartiteState, NamedOperator,
};
use sepkit::tensor::min_eigenvalue;
use sepkit::upb::{build_witness, builtin_upb, verify_upb, BuiltinUpb};
use sepkit::{ComplexMatrix, HilbertDims};

use document::Document;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sepkit::Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed document {path}: {source}")]
    Parse {
        path: String,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for optimizer convergence failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_convergence_failure() => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "sepkit",
    version,
    about = "Separability tests for multipartite states"
)]
pub struct Cli {
    /// Print tables instead of JSON documents.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create states.
    #[command(subcommand)]
    State(StateCommand),
    /// Partial-transpose test across one cut.
    Ppt {
        /// Cut as `subset|complement` digits, e.g. `1|23`.
        #[arg(long, conflicts_with = "cut_set")]
        cut: Option<String>,
        /// Transposed subsystems as a comma list, e.g. `1,3`.
        #[arg(long, value_delimiter = ',')]
        cut_set: Option<Vec<usize>>,
        input: Option<PathBuf>,
    },
    /// Partial-transpose test on every one-versus-rest cut.
    Semisep { input: Option<PathBuf> },
    /// Unextendible product sets.
    #[command(subcommand)]
    Upb(UpbCommand),
    /// Entanglement witnesses.
    #[command(subcommand)]
    Witness(WitnessCommand),
    /// Linear maps.
    #[command(subcommand)]
    Map(MapCommand),
    /// Separable, entangled or inconclusive, with a certificate.
    Decide {
        /// Directory of witness documents; the built-in catalog when absent.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[command(flatten)]
        budget: BudgetArgs,
        input: Option<PathBuf>,
    },
    /// Extremize `<phi|X|phi>` over product vectors.
    Optimize {
        #[arg(long)]
        op: PathBuf,
        #[arg(long, value_enum, default_value = "min")]
        direction: DirectionArg,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Debug, Subcommand)]
enum StateCommand {
    Make {
        #[arg(long, value_enum)]
        name: StateName,
        /// Mixing parameter of the Werner state.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        dims: Option<Vec<usize>>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    RandomSeparable {
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long)]
        k: usize,
        #[arg(long, env = "SEPKIT_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum UpbCommand {
    Builtin {
        #[arg(long)]
        name: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Certify unextendibility; writes the set with its epsilon certificate.
    Verify {
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum WitnessCommand {
    /// `P_S - (epsilon / c) C` from a verified product set.
    Build {
        #[arg(long)]
        upb: PathBuf,
        /// `identity` or `file:<operator.json>`.
        #[arg(long = "C", default_value = "identity")]
        c: String,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// `Tr(W rho)`.
    Eval {
        witness: PathBuf,
        input: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum MapCommand {
    FromWitness {
        witness: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// `(I ⊗ L)(rho)` with `L` on the listed subsystems.
    Apply {
        map: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        on: Vec<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StateName {
    Werner,
    Pplus,
    Singlet,
    Maxmixed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Min,
    Max,
}

#[derive(Debug, Args)]
struct BudgetArgs {
    /// Seesaw restarts.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
    /// Grid points per angle for the cross-check.
    #[arg(long, default_value_t = 16)]
    grid: usize,
    #[arg(long, env = "SEPKIT_SEED", default_value_t = 0)]
    seed: u64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget {
            seesaw: SeesawSettings {
                restarts: self.restarts,
                seed: self.seed,
                ..SeesawSettings::default()
            },
            grid: GridSettings {
                points: self.grid,
                ..GridSettings::default()
            },
            ..Budget::default()
        }
    }
}

/// A document plus its tabular rendering.
struct Output {
    doc: Document,
    human: String,
    path: Option<PathBuf>,
}

impl Output {
    fn new(doc: Document, human: String) -> Self {
        Output {
            doc,
            human,
            path: None,
        }
    }

    fn to(mut self, path: Option<PathBuf>) -> Self {
        self.path = path;
        self
    }
}

/// Parses `argv`, runs the command and returns the exit code. Documents go to
/// `stdout` (or the `-o` file), diagnostics to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn std::io::Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let human = cli.human;
    let result = execute(cli.command).and_then(|out| emit(out, human, stdout));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Output, human: bool, stdout: &mut dyn std::io::Write) -> CliResult<()> {
    let write_err = |path: &str, source| CliError::Write {
        path: path.to_string(),
        source,
    };
    if let Some(path) = &out.path {
        std::fs::write(path, out.doc.to_json() + "\n")
            .map_err(|e| write_err(&path.display().to_string(), e))?;
        if human {
            write!(stdout, "{}", out.human).map_err(|e| write_err("stdout", e))?;
        }
        return Ok(());
    }
    let text = if human {
        out.human
    } else {
        out.doc.to_json() + "\n"
    };
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| write_err("stdout", e))
}

fn read_doc(path: Option<&Path>) -> CliResult<Document> {
    let (name, text) = match path {
        Some(p) if p != Path::new("-") => {
            let name = p.display().to_string();
            let text = std::fs::read_to_string(p).map_err(|source| CliError::Read {
                path: name.clone(),
                source,
            })?;
            (name, text)
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|source| CliError::Read {
                    path: "stdin".into(),
                    source,
                })?;
            ("stdin".to_string(), text)
        }
    };
    Document::from_json(&text).map_err(|source| CliError::Parse { path: name, source })
}

fn read_state(path: Option<&Path>) -> CliResult<MultipartiteState> {
    Ok(read_doc(path)?.to_state()?)
}

/// `1|23` → `[1]`, checked against the complement `[2, 3]`.
fn parse_cut(cut: &str, n: usize) -> CliResult<Vec<usize>> {
    let bad = |why: &str| CliError::Usage(format!("cut `{cut}`: {why}"));
    let (left, right) = cut
        .split_once('|')
        .ok_or_else(|| bad("expected `subset|complement`, e.g. 1|23"))?;
    let digits = |s: &str| -> CliResult<Vec<usize>> {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .filter(|&d| d >= 1)
                    .map(|d| d as usize)
                    .ok_or_else(|| bad("subsystems are the digits 1-9; use --cut-set beyond 9"))
            })
            .collect()
    };
    let (mut subset, mut rest) = (digits(left)?, digits(right)?);
    subset.sort_unstable();
    rest.sort_unstable();
    let mut all: Vec<usize> = subset.iter().chain(&rest).copied().collect();
    all.sort_unstable();
    if all != (1..=n).collect::<Vec<_>>() {
        return Err(bad(&format!(
            "the two sides must partition the subsystems 1..={n}"
        )));
    }
    Ok(subset)
}

fn join(v: &[usize]) -> String {
    v.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn cut_table(cuts: &[CutReport]) -> String {
    let mut s = format!(
        "{:<12} {:<12} {:>24} {:>7}\n",
        "subset", "complement", "min_eig_pt", "passes"
    );
    for c in cuts {
        let _ = writeln!(
            s,
            "{:<12} {:<12} {:>24.16e} {:>7}",
            join(&c.subset),
            join(&c.complement),
            c.min_eig_pt,
            c.passes
        );
    }
    s
}

fn opt_summary(name: &str, r: &OptResult) -> String {
    let mut s = format!(
        "{name:<12} {:.16e}\nconverged    {}\nmethod       {:?}\niterations   {}\nrestarts     {}\n",
        r.value, r.converged, r.method, r.iterations, r.restarts_used
    );
    if let Some(g) = r.cross_check {
        let _ = writeln!(s, "grid         {g:.16e}");
    }
    s
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("reports are plain data")
}

fn execute(command: Command) -> CliResult<Output> {
    match command {
        Command::State(cmd) => state_command(cmd),
        Command::Ppt {
            cut,
            cut_set,
            input,
        } => {
            let state = read_state(input.as_deref())?;
            let subset = match (cut, cut_set) {
                (Some(c), _) => parse_cut(&c, state.dims().len())?,
                (None, Some(s)) => s,
                (None, None) => return Err(CliError::Usage("give --cut or --cut-set".into())),
            };
            let report = ppt_check(&state, &subset)?;
            let human = cut_table(std::slice::from_ref(&report));
            Ok(Output::new(
                Document::report(state.dims().clone(), to_value(&report)),
                human,
            ))
        }
        Command::Semisep { input } => {
            let state = read_state(input.as_deref())?;
            let cuts = semisep_report(&state)?;
            let all_pass = cuts.iter().all(|c| c.passes);
            let human = cut_table(&cuts) + &format!("all cuts pass: {all_pass}\n");
            Ok(Output::new(
                Document::report(
                    state.dims().clone(),
                    json!({ "cuts": cuts, "all_pass": all_pass }),
                ),
                human,
            ))
        }
        Command::Upb(cmd) => upb_command(cmd),
        Command::Witness(cmd) => witness_command(cmd),
        Command::Map(cmd) => map_command(cmd),
        Command::Decide {
            catalog,
            budget,
            input,
        } => {
            let state = read_state(input.as_deref())?;
            let budget = budget.budget();
            let catalog = match catalog {
                Some(dir) => load_catalog(&dir)?,
                None => default_catalog(&budget)?,
            };
            let verdict = decide(&state, &catalog, &budget)?;
            let human = verdict_table(&verdict);
            Ok(Output::new(
                Document::report(state.dims().clone(), to_value(&verdict))
                    .with_seed(Some(budget.seesaw.seed)),
                human,
            ))
        }
        Command::Optimize {
            op,
            direction,
            budget,
        } => {
            let doc = read_doc(Some(&op))?;
            let x = doc.to_operator()?;
            let dir = match direction {
                DirectionArg::Min => Direction::Min,
                DirectionArg::Max => Direction::Max,
            };
            let budget = budget.budget();
            let result = if doc.dims.is_all_qubits() {
                certify(&x, &doc.dims, dir, &budget)?
            } else {
                seesaw_extremize(&x, &doc.dims, dir, &budget.seesaw)?
            };
            let human = opt_summary("value", &result);
            Ok(Output::new(
                Document::report(doc.dims.clone(), to_value(&result))
                    .with_seed(Some(budget.seesaw.seed)),
                human,
            ))
        }
    }
}

fn state_command(cmd: StateCommand) -> CliResult<Output> {
    match cmd {
        StateCommand::Make {
            name,
            p,
            dims,
            output,
        } => {
            let dims = HilbertDims::new(dims.unwrap_or_else(|| vec![2, 2]))?;
            let two_qubits = |what: &str| {
                if dims.as_slice() == [2, 2] {
                    Ok(())
                } else {
                    Err(CliError::Usage(format!(
                        "{what} lives on dims 2,2, got {dims}"
                    )))
                }
            };
            let state = match name {
                StateName::Werner => {
                    two_qubits("the Werner state")?;
                    let p = p.ok_or_else(|| CliError::Usage("werner needs --p".into()))?;
                    werner_state(p)?
                }
                StateName::Singlet => {
                    two_qubits("the singlet")?;
                    MultipartiteState::new(
                        dims.clone(),
                        named_operator(NamedOperator::PsiMinus, 2)?,
                    )?
                }
                StateName::Pplus => match dims.as_slice() {
                    &[a, b] if a == b => density_from_pure(&max_entangled_vector(a), dims.clone())?,
                    _ => {
                        return Err(CliError::Usage(format!(
                            "pplus needs two equal dims, got {dims}"
                        )))
                    }
                },
                StateName::Maxmixed => MultipartiteState::maximally_mixed(dims.clone()),
            };
            let human = state_summary(&state);
            Ok(Output::new(Document::from_state(&state), human).to(output))
        }
        StateCommand::RandomSeparable {
            dims,
            k,
            seed,
            output,
        } => {
            let state = random_separable(&HilbertDims::new(dims)?, k, seed)?;
            let human = state_summary(&state);
            Ok(Output::new(Document::from_state(&state).with_seed(Some(seed)), human).to(output))
        }
    }
}

fn state_summary(state: &MultipartiteState) -> String {
    format!(
        "dims         {}\npurity       {:.16e}\ncertificate  {}\n",
        state.dims(),
        state.purity(),
        if state.decomposition().is_some() {
            "separable decomposition"
        } else {
            "none"
        }
    )
}

fn upb_command(cmd: UpbCommand) -> CliResult<Output> {
    match cmd {
        UpbCommand::Builtin { name, output } => {
            let which: BuiltinUpb = name.parse().map_err(|_| {
                CliError::Usage(format!(
                    "unknown builtin set `{name}`; known: shifts, shifts_paper_corrected"
                ))
            })?;
            let u = builtin_upb(which);
            let human = format!("{} members on dims {}\n", u.members().len(), u.dims());
            Ok(Output::new(Document::from_upb(&u), human).to(output))
        }
        UpbCommand::Verify {
            budget,
            output,
            input,
        } => {
            let u = read_doc(input.as_deref())?.to_upb()?;
            let budget = budget.budget();
            let verified = verify_upb(&u, &budget)?;
            let cert = verified.epsilon_certificate().expect("verified");
            let human = opt_summary("epsilon", cert);
            Ok(Output::new(
                Document::from_upb(&verified).with_seed(Some(budget.seesaw.seed)),
                human,
            )
            .to(output))
        }
    }
}

fn witness_command(cmd: WitnessCommand) -> CliResult<Output> {
    match cmd {
        WitnessCommand::Build {
            upb,
            c,
            budget,
            output,
        } => {
            let u = read_doc(Some(&upb))?.to_upb()?;
            let c_op = if c == "identity" {
                ComplexMatrix::identity(u.dims().total())
            } else if let Some(path) = c.strip_prefix("file:") {
                read_doc(Some(Path::new(path)))?.to_operator()?
            } else {
                return Err(CliError::Usage(format!(
                    "--C expects `identity` or `file:<path>`, got `{c}`"
                )));
            };
            let budget = budget.budget();
            let built = build_witness(&u, &c_op, &budget)?;
            let human = format!(
                "epsilon      {:.16e}\nc            {:.16e}\nTr(C rho)    {:.16e}\nTr(W rho)    {:.16e}\n",
                built.epsilon, built.c.value, built.c_overlap, built.value_on_state
            );
            Ok(Output::new(
                Document::from_witness(&built.witness).with_seed(Some(budget.seesaw.seed)),
                human,
            )
            .to(output))
        }
        WitnessCommand::Eval { witness, input } => {
            let w = read_doc(Some(&witness))?.to_witness()?;
            let state = read_state(input.as_deref())?;
            let value = eval_witness(&w, &state)?;
            let certified = w.is_certified();
            let detects = certified && value < -sepkit::criteria::DETECTION_TOL;
            let human = format!(
                "value        {value:.16e}\ncertified    {certified}\ndetects      {detects}\n"
            );
            Ok(Output::new(
                Document::report(
                    state.dims().clone(),
                    json!({ "value": value, "certified": certified, "detects": detects }),
                ),
                human,
            ))
        }
    }
}

fn map_command(cmd: MapCommand) -> CliResult<Output> {
    match cmd {
        MapCommand::FromWitness { witness, output } => {
            let w = read_doc(Some(&witness))?.to_witness()?;
            let m = map_from_witness(&w)?;
            let human = format!(
                "map          {} -> {}\ncertified    {}\n",
                m.in_dims(),
                m.out_dims(),
                m.is_certified_lmpp()
            );
            Ok(Output::new(Document::from_map(&m), human).to(output))
        }
        MapCommand::Apply {
            map,
            on,
            output,
            input,
        } => {
            let m = read_doc(Some(&map))?.to_map()?;
            let state = read_state(input.as_deref())?;
            let (image, dims) = apply_map(&m, &state, &on)?;
            let min_eig = min_eigenvalue(&image)?;
            let human = format!(
                "output dims  {dims}\nmin eig      {min_eig:.16e}\ncertified    {}\n",
                m.is_certified_lmpp()
            );
            Ok(Output::new(Document::from_operator(dims, image), human).to(output))
        }
    }
}

fn verdict_table(v: &Verdict) -> String {
    let mut s = format!("status       {:?}\n", v.status);
    let cert = v
        .certificate
        .as_ref()
        .map(|c| to_value(c)["type"].as_str().unwrap_or("").to_string())
        .unwrap_or_else(|| "none".into());
    let _ = writeln!(s, "certificate  {cert}");
    s + &cut_table(&v.cuts)
}

/// Every `*.json` witness document in `dir`, in file-name order.
fn load_catalog(dir: &Path) -> CliResult<Vec<Witness>> {
    let read_err = |source| CliError::Read {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(read_err)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::result::Result<_, _>>()
        .map_err(read_err)?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    paths
        .iter()
        .map(|p| Ok(read_doc(Some(p))?.to_witness()?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cut_syntax() {
        assert_eq!(parse_cut("1|23", 3).unwrap(), vec![1]);
        assert_eq!(parse_cut("31|2", 3).unwrap(), vec![1, 3]);
        assert!(parse_cut("1|2", 3).is_err());
        assert!(parse_cut("12", 2).is_err());
        assert!(parse_cut("0|1", 2).is_err());
    }
}
