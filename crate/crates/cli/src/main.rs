use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use refmc::braid::{orbit, DEFAULT_ORBIT_CAP};
use refmc::imprim::{brute_nice_search, construct_nice, tuple_product, TypedReflection};
use refmc::midconv::middle_convolution_full;
use refmc::pipeline::{
    distinct_orbits, load_rows, partition_types, report, run_types, search_nice, Equivalence, ReportFormat, RunOptions,
    DEFAULT_SEARCH_CAP,
};
use refmc::refgroup::{catalog_report, load_catalog};
use refmc::sl2::{induce, residues, subgroup_id, DEFAULT_GROUP_CAP};
use refmc::{make_field, MatTuple, RootOfUnity};

#[derive(Parser)]
#[command(name = "refmc", version, about = "Nice reflection tuples, middle convolution and braid orbits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Catalog groups.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// Imprimitive groups G(m,p,n).
    Imprim {
        #[command(subcommand)]
        cmd: ImprimCmd,
    },
    /// Middle convolution of a tuple file.
    Mc {
        #[arg(long)]
        tuple: PathBuf,
        /// Parameter as `d:k`, meaning zeta_d^k.
        #[arg(long)]
        lambda: RootOfUnity,
        /// Print the dimension report without the output tuple.
        #[arg(long)]
        check_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Braid orbit of an SL2 tuple.
    Orbit {
        #[arg(long)]
        tuple: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ORBIT_CAP)]
        cap: usize,
        #[arg(long)]
        emit_signatures: bool,
    },
    /// Append the inverse product and scale into SL2.
    Induce {
        #[arg(long)]
        tuple: PathBuf,
        /// Embed the result in the field of this conductor.
        #[arg(long)]
        field_extension: Option<u32>,
    },
    /// Finite or infinite verdict for the group generated by a tuple.
    Subgroup {
        #[arg(long)]
        tuple: PathBuf,
        #[arg(long, default_value_t = DEFAULT_GROUP_CAP)]
        cap: usize,
    },
    /// Full search for one group and tuple length.
    Run {
        #[arg(long)]
        group: String,
        #[arg(long = "T")]
        t: usize,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Lift the search cap.
        #[arg(long)]
        unbounded: bool,
        /// Report both members of each inverse pair.
        #[arg(long)]
        all_types: bool,
        #[arg(long, default_value_t = DEFAULT_ORBIT_CAP)]
        orbit_cap: usize,
        /// Check every member of types up to this size against the exemplar orbit.
        #[arg(long, default_value_t = 0)]
        step9: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Tables from a result directory.
    Report {
        #[arg(long)]
        dir: PathBuf,
        #[arg(long, default_value = "tsv")]
        format: ReportFormat,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    Info { id: String },
    Validate { id: String },
}

#[derive(Subcommand)]
enum ImprimCmd {
    Construct {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t: usize,
    },
    /// Existence table for all p | m, m <= m-max, checked against brute force.
    Verify {
        #[arg(long, default_value_t = 6)]
        m_max: u32,
        #[arg(long, default_value_t = 1_000_000)]
        cap: u64,
    },
}

fn read_tuple(path: &Path) -> Result<MatTuple> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    MatTuple::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn witness_text(t: &[TypedReflection]) -> String {
    t.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" ")
}

const IMPRIM_SHAPES: [(usize, usize); 4] = [(3, 3), (3, 4), (4, 4), (4, 5)];

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Group { cmd: GroupCmd::Info { id } } => {
            let e = load_catalog(&id)?;
            let r = catalog_report(&id)?;
            println!("id\t{}", e.id);
            println!("order\t{}", e.order);
            println!("degrees\t{:?}", e.degrees);
            println!("dim\t{}", e.generators[0].dim());
            println!("field\t{}", e.generators[0].field().conductor());
            println!("reflections\t{}", r.reflections);
            println!("reflection classes\t{}", r.reflection_classes);
            let ev: Vec<String> = r.class_eigenvalues.iter().map(|x| x.to_string()).collect();
            println!("class eigenvalues\t{}", ev.join(" "));
        }
        Cmd::Group { cmd: GroupCmd::Validate { id } } => {
            let r = catalog_report(&id)?;
            println!("{id}: order {} ok", r.order);
            for (d, want, got) in &r.degree_checks {
                println!("  primitive {d}-th roots: multiplicity {got} (degrees give {want})");
            }
        }
        Cmd::Imprim { cmd: ImprimCmd::Construct { m, p, n, t } } => match construct_nice(m, p, n, t)? {
            Some((w, mu)) => {
                println!("{}", witness_text(&w));
                println!("product\t{}", tuple_product(&w, m, n));
                println!("lambda\t{mu}");
            }
            None => println!("none"),
        },
        Cmd::Imprim { cmd: ImprimCmd::Verify { m_max, cap } } => {
            println!("m\tp\tn\tT\texists\twitness\tlambda\tbrute");
            let mut disagree = 0;
            for m in 2..=m_max {
                for p in (1..=m).filter(|p| m % p == 0) {
                    for (n, t) in IMPRIM_SHAPES {
                        let built = match construct_nice(m, p, n, t) {
                            Ok(b) => b,
                            Err(e) => {
                                println!("{m}\t{p}\t{n}\t{t}\t-\t{e}\t-\t-");
                                continue;
                            }
                        };
                        let brute = match brute_nice_search(m, p, n, t, cap) {
                            Ok(found) => {
                                if found.is_empty() == built.is_some() {
                                    disagree += 1;
                                }
                                (!found.is_empty()).to_string()
                            }
                            Err(e) => e.to_string(),
                        };
                        let (w, l) = built
                            .as_ref()
                            .map_or(("-".into(), "-".into()), |(w, l)| (witness_text(w), l.to_string()));
                        println!("{m}\t{p}\t{n}\t{t}\t{}\t{w}\t{l}\t{brute}", built.is_some());
                    }
                }
            }
            if disagree > 0 {
                bail!("{disagree} disagreements between construction and brute force");
            }
        }
        Cmd::Mc { tuple, lambda, check_only, out } => {
            let a = read_tuple(&tuple)?;
            let l = lambda.to_elt(&a.field().with_roots(lambda.order()))?;
            let (mc, data) = middle_convolution_full(&a, &l)?;
            eprintln!("dim K = {}, dim L = {}, output dim = {}", data.k.dim(), data.l.dim(), mc.dim());
            if check_only {
                println!("{}", mc.dim());
            } else {
                write_or_print(out.as_deref(), &mc.to_string())?;
            }
        }
        Cmd::Orbit { tuple, cap, emit_signatures } => {
            let m = read_tuple(&tuple)?;
            let o = orbit(&m, cap)?;
            println!("{}", o.size());
            if emit_signatures {
                let mut sigs: Vec<(usize, String)> = o.signatures.iter().map(|(s, &i)| (i, s.to_string())).collect();
                sigs.sort();
                for (_, s) in sigs {
                    println!("{s}");
                }
            }
        }
        Cmd::Induce { tuple, field_extension } => {
            let mc = read_tuple(&tuple)?;
            let ind = induce(&mc)?;
            let t = match field_extension {
                Some(n) => ind.tuple.embed(&ind.tuple.field().join(&make_field(n)))?,
                None => ind.tuple,
            };
            let c: Vec<String> = ind.character.iter().map(|r| r.to_string()).collect();
            eprintln!("character {}", c.join(" "));
            let r = residues(&t);
            let th: Vec<String> =
                r.theta.iter().map(|x| x.as_ref().map_or("inf".into(), |q| q.to_string())).collect();
            eprintln!("theta {}", th.join(" "));
            print!("{t}");
        }
        Cmd::Subgroup { tuple, cap } => {
            let m = read_tuple(&tuple)?;
            println!("{}", subgroup_id(&m, cap)?);
        }
        Cmd::Run { group, t, cap, out, unbounded, all_types, orbit_cap, step9, threads } => {
            let search_cap = if unbounded { usize::MAX } else { cap };
            let mut opts = RunOptions { search_cap, orbit_cap, all_types, step9_limit: step9, out, ..Default::default() };
            if let Some(n) = threads {
                opts.threads = n;
            }
            if group == "G32" && t == 5 && !unbounded {
                bail!("the G32 five-tuple search needs --unbounded");
            }
            let tuples = search_nice(&group, t, search_cap)?;
            eprintln!("{} nice {t}-tuples", tuples.len());
            let rows = run_types(&group, t, &partition_types(&tuples), &opts)?;
            print!("{}", report(&rows, ReportFormat::Tsv));
            let n = distinct_orbits(&rows, orbit_cap, Equivalence::Strict)?;
            println!("# distinct orbits: {n}");
        }
        Cmd::Report { dir, format } => {
            let rows = load_rows(&dir)?;
            if rows.is_empty() {
                bail!("no results under {}", dir.display());
            }
            print!("{}", report(&rows, format));
        }
    }
    Ok(())
}
