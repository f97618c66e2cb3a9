//! Cut finder backed by an external executable.

use std::{
    io::Write,
    process::{Command, Stdio},
};

use hicluster_core::{
    divisive::{CutFinder, FinderStats},
    Cut, Error, Result, WeightedGraph,
};

use crate::formats;

/// Runs `sh -c <command>` once per cut. The subgraph arrives on standard
/// input in the graph format; the process prints one side of the cut as
/// whitespace-separated vertex ids and exits with status 0.
#[derive(Clone, Debug)]
pub struct PluginFinder {
    command: String,
    stats: FinderStats,
}

impl PluginFinder {
    pub fn new(command: impl Into<String>) -> Self {
        PluginFinder { command: command.into(), stats: FinderStats::default() }
    }
}

impl CutFinder for PluginFinder {
    fn find_cut(&mut self, g: &WeightedGraph) -> Result<Cut> {
        self.stats.calls += 1;
        let fail = |msg: String| Error::InvalidArgument(format!("cut finder `{}`: {msg}", self.command));
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&self.command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| fail(e.to_string()))?;
        let input = formats::write_graph(g);
        let mut stdin = child.stdin.take().expect("piped stdin");
        // a finder may exit without reading everything
        let written = stdin.write_all(input.as_bytes());
        drop(stdin);
        let out = child.wait_with_output().map_err(|e| fail(e.to_string()))?;
        if !out.status.success() {
            return Err(fail(format!("exited with {}", out.status)));
        }
        if let Err(e) = written {
            if e.kind() != std::io::ErrorKind::BrokenPipe {
                return Err(fail(e.to_string()));
            }
        }
        let text = String::from_utf8_lossy(&out.stdout);
        let side = text
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|_| fail(format!("bad vertex id {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Cut::from_side(&side, g.n()).map_err(|e| fail(e.to_string()))
    }

    fn stats(&self) -> FinderStats {
        self.stats
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hicluster_core::{divisive, Mode};

    #[test]
    fn fixed_side_plugin() {
        let g = WeightedGraph::clique(2, Mode::Similarity);
        let mut f = PluginFinder::new("cat > /dev/null; echo 1");
        let cut = f.find_cut(&g).unwrap();
        assert_eq!(cut.side_a, vec![1]);
        assert_eq!(f.stats().calls, 1);
    }

    #[test]
    fn first_vertex_plugin_builds_a_caterpillar() {
        let g = WeightedGraph::clique(4, Mode::Similarity);
        let mut f = PluginFinder::new("echo 0");
        let out = divisive::recursive_cut_tree(&g, &mut f).unwrap();
        assert_eq!(out.tree.to_string(), "(0,(1,(2,3)))");
    }

    #[test]
    fn failures_are_errors() {
        let g = WeightedGraph::clique(3, Mode::Similarity);
        assert!(PluginFinder::new("exit 1").find_cut(&g).is_err());
        assert!(PluginFinder::new("echo x").find_cut(&g).is_err());
        assert!(PluginFinder::new("echo 0 1 2").find_cut(&g).is_err());
    }
}
