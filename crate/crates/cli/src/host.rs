//! Host graphs named on the command line, e.g. `paley:1009` or `gnp:200:0.5`.

use anyhow::{bail, Context, Result};
use robustlab::generators::{gen_gnp, gen_paley, gen_random_regular};
use robustlab::{Graph, RngStream};
use std::path::Path;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
pub enum HostSpec {
    Complete(usize),
    Cycle(usize),
    Petersen,
    Paley(usize),
    Gnp(usize, f64),
    Regular(usize, usize),
}

impl HostSpec {
    pub fn family(&self) -> &'static str {
        match self {
            HostSpec::Complete(_) => "complete",
            HostSpec::Cycle(_) => "cycle",
            HostSpec::Petersen => "petersen",
            HostSpec::Paley(_) => "paley",
            HostSpec::Gnp(..) => "gnp",
            HostSpec::Regular(..) => "regular",
        }
    }

    /// Random families draw from a stream derived from `seed`.
    pub fn build(&self, seed: u64) -> Result<Graph> {
        let host_seed = RngStream::new(seed, "cli-host").derive_seed();
        Ok(match *self {
            HostSpec::Complete(n) => Graph::complete(n),
            HostSpec::Cycle(n) => Graph::cycle(n),
            HostSpec::Petersen => Graph::petersen(),
            HostSpec::Paley(q) => gen_paley(q)?,
            HostSpec::Gnp(n, p) => gen_gnp(n, p, host_seed)?,
            HostSpec::Regular(n, d) => gen_random_regular(n, d, host_seed)?,
        })
    }
}

impl FromStr for HostSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let int = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .with_context(|| format!("host {s:?} is missing a parameter"))?
                .parse()
                .with_context(|| format!("bad integer in host {s:?}"))
        };
        let spec = match parts[0] {
            "complete" => HostSpec::Complete(int(1)?),
            "cycle" => HostSpec::Cycle(int(1)?),
            "petersen" => HostSpec::Petersen,
            "paley" => HostSpec::Paley(int(1)?),
            "gnp" => {
                let p = parts.get(2).with_context(|| format!("host {s:?} needs gnp:n:p"))?;
                HostSpec::Gnp(int(1)?, p.parse().context("bad p")?)
            }
            "regular" => HostSpec::Regular(int(1)?, int(2)?),
            other => bail!("unknown host family {other:?} (complete, cycle, petersen, paley, gnp, regular)"),
        };
        let expected = match spec {
            HostSpec::Petersen => 1,
            HostSpec::Gnp(..) | HostSpec::Regular(..) => 3,
            _ => 2,
        };
        if parts.len() != expected {
            bail!("host {s:?} has the wrong number of parameters");
        }
        Ok(spec)
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Graph::from_edge_list(&text).with_context(|| format!("parsing {}", path.display()))
}

/// A graph given either as an edge-list file or as a host spec.
pub fn load(input: Option<&Path>, host: Option<&HostSpec>, seed: u64) -> Result<(String, Graph)> {
    match (input, host) {
        (Some(path), None) => {
            let family = path.file_stem().map_or("file".into(), |s| s.to_string_lossy().into_owned());
            Ok((family, read_graph(path)?))
        }
        (None, Some(spec)) => Ok((spec.family().to_string(), spec.build(seed)?)),
        _ => bail!("give exactly one of --input and --host"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_specs() {
        assert_eq!("paley:13".parse::<HostSpec>().unwrap(), HostSpec::Paley(13));
        assert_eq!("gnp:30:0.5".parse::<HostSpec>().unwrap(), HostSpec::Gnp(30, 0.5));
        assert_eq!("petersen".parse::<HostSpec>().unwrap(), HostSpec::Petersen);
        for bad in ["paley", "paley:x", "gnp:3", "cube:3", "complete:4:5"] {
            assert!(bad.parse::<HostSpec>().is_err(), "{bad}");
        }
    }
}
