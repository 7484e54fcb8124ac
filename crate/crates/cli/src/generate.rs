use std::path::PathBuf;

use clap::{Args, ValueEnum};
use stiefel_polar::instances::{self, GroundTruth, Instance};
use stiefel_polar::tensor::{random_real_tensor, random_tensor};
use stiefel_polar::{DaggerMode, ObjectiveSpec};

use crate::error::{CliError, CliResult};
use crate::files::{parse_list, write_json, SizeList};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Gaussian tensor with a diagonalization or compression spec.
    Random,
    /// Symmetrized Gaussian tensor with a symmetric spec.
    Symmetric,
    /// `λ·u_1 ⊗ ⋯ ⊗ u_d`, rank-one diagonalization.
    Rank1,
    /// `λ·u ⊗ ⋯ ⊗ u`, rank-one symmetric diagonalization.
    Symrank1,
    /// Core times orthonormal factors, compression at the core ranks.
    Tucker,
    /// Rotated diagonal tensors, diagonalization.
    Prop59,
    /// Rotated diagonal symmetric tensors, symmetric diagonalization.
    Prop65,
    /// Rotated diagonal tensors, compression.
    Prop710,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Diag,
    Compress,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DaggerArg {
    H,
    T,
}

impl From<DaggerArg> for DaggerMode {
    fn from(d: DaggerArg) -> Self {
        match d {
            DaggerArg::H => DaggerMode::ConjugateTranspose,
            DaggerArg::T => DaggerMode::Transpose,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Output directory; receives spec.json and truth.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Mode sizes for random, rank1 and tucker, e.g. 4,4,4.
    #[arg(long, value_parser = parse_list)]
    pub dims: Option<SizeList>,
    /// Per-block ranks for compression specs and tucker cores.
    #[arg(long, value_parser = parse_list)]
    pub ranks: Option<SizeList>,
    /// Shared rank for diagonalization specs.
    #[arg(long)]
    pub rank: Option<usize>,
    #[arg(long, value_enum, default_value = "diag")]
    pub family: FamilyArg,
    /// Mode size for symmetric and rotated kinds.
    #[arg(short = 'n', long)]
    pub n: Option<usize>,
    /// Rank for rotated kinds.
    #[arg(short = 'r', long)]
    pub r: Option<usize>,
    /// Number of tensors for rotated kinds.
    #[arg(short = 'l', long, default_value_t = 1)]
    pub l: usize,
    /// Tensor order for symmetric and rotated kinds.
    #[arg(short = 'd', long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Diagonal positions set to zero in every rotated tensor.
    #[arg(long, value_parser = parse_list)]
    pub zero_entries: Option<SizeList>,
    #[arg(long, value_enum, default_value = "h")]
    pub dagger: DaggerArg,
    /// Real-valued data where the kind supports it.
    #[arg(long)]
    pub real: bool,
}

fn need<T>(v: Option<T>, flag: &str, kind: Kind) -> CliResult<T> {
    v.ok_or_else(|| CliError::Validation(format!("--{flag} is required for kind {kind:?}")))
}

fn build(a: &GenerateArgs) -> CliResult<(ObjectiveSpec, GroundTruth)> {
    let dagger = DaggerMode::from(a.dagger);
    let zeros = a.zero_entries.clone().unwrap_or_default();
    let bare = |spec: ObjectiveSpec, kind: &str| (spec, GroundTruth { kind: kind.into(), seed: a.seed, ..Default::default() });
    let known = |i: Instance| (i.spec, i.truth);
    Ok(match a.kind {
        Kind::Random => {
            let dims = need(a.dims.clone(), "dims", a.kind)?;
            let t = if a.real { random_real_tensor(&dims, a.seed)? } else { random_tensor(&dims, a.seed)? };
            let spec = match a.family {
                FamilyArg::Diag => ObjectiveSpec::diagonalization(vec![t], vec![1.0], a.rank.unwrap_or(1), dagger)?,
                FamilyArg::Compress => {
                    let ranks = a.ranks.clone().unwrap_or_else(|| vec![1; dims.len()]);
                    ObjectiveSpec::compression(vec![t], vec![1.0], ranks, dagger)?
                }
            };
            bare(spec, "random")
        }
        Kind::Symmetric => {
            let dims = vec![need(a.n, "n", a.kind)?; a.d];
            let t = if a.real { random_real_tensor(&dims, a.seed)? } else { random_tensor(&dims, a.seed)? };
            let spec = ObjectiveSpec::symmetric_diagonalization(vec![t.symmetrize()?], vec![1.0], a.rank.unwrap_or(1), dagger)?;
            bare(spec, "symmetric")
        }
        Kind::Rank1 => known(instances::rank_one(&need(a.dims.clone(), "dims", a.kind)?, a.lambda, a.seed, a.real)?),
        Kind::Symrank1 => known(instances::symmetric_rank_one(need(a.n, "n", a.kind)?, a.d, a.lambda, a.seed, a.real)?),
        Kind::Tucker => {
            known(instances::tucker(&need(a.dims.clone(), "dims", a.kind)?, &need(a.ranks.clone(), "ranks", a.kind)?, a.seed, a.real)?)
        }
        Kind::Prop59 => known(instances::rotated_diagonalization(
            need(a.n, "n", a.kind)?,
            need(a.r, "r", a.kind)?,
            a.l,
            a.d,
            a.seed,
            &zeros,
            dagger,
        )?),
        Kind::Prop65 => {
            known(instances::rotated_symmetric(need(a.n, "n", a.kind)?, need(a.r, "r", a.kind)?, a.l, a.d, a.seed, &zeros, dagger)?)
        }
        Kind::Prop710 => known(instances::rotated_compression(need(a.n, "n", a.kind)?, need(a.r, "r", a.kind)?, a.l, a.d, a.seed, dagger)?),
    })
}

pub fn run(a: &GenerateArgs) -> CliResult<()> {
    let (spec, truth) = build(a)?;
    write_json(&a.out.join("spec.json"), &spec)?;
    write_json(&a.out.join("truth.json"), &truth)?;
    log::info!("wrote {:?} instance to {}", a.kind, a.out.display());
    Ok(())
}
