use std::io::{self, Write};

use crate::error::{Error, Result};

pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowEdge {
    pub from: usize,
    pub to: usize,
    pub capacity: i64,
    pub cost: i64,
}

/// Directed network with non-negative integer capacities and costs.
/// Parallel edges are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    vertex_count: usize,
    source: usize,
    sink: usize,
    edges: Vec<FlowEdge>,
}

impl FlowNetwork {
    pub fn new(vertex_count: usize, source: usize, sink: usize) -> Result<Self> {
        if source == sink {
            return Err(Error::InvalidInstance("source and sink coincide".into()));
        }
        if source >= vertex_count || sink >= vertex_count {
            return Err(Error::InvalidInstance("source or sink out of range".into()));
        }
        Ok(FlowNetwork {
            vertex_count,
            source,
            sink,
            edges: Vec::new(),
        })
    }

    pub fn add_vertex(&mut self) -> usize {
        self.vertex_count += 1;
        self.vertex_count - 1
    }

    /// Appends an edge and returns its id.
    ///
    /// Panics if an endpoint is out of range or capacity/cost is negative.
    pub fn add_edge(&mut self, from: usize, to: usize, capacity: i64, cost: i64) -> EdgeId {
        assert!(from < self.vertex_count && to < self.vertex_count, "edge endpoint out of range");
        assert!(capacity >= 0 && cost >= 0, "negative capacity or cost");
        self.edges.push(FlowEdge {
            from,
            to,
            capacity,
            cost,
        });
        self.edges.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn sink(&self) -> usize {
        self.sink
    }

    pub fn edges(&self) -> &[FlowEdge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &FlowEdge {
        &self.edges[id]
    }

    /// Plain edge-list dump: a header comment then `from to cap cost` per line.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "# vertices={} source={} sink={}",
            self.vertex_count, self.source, self.sink
        )?;
        for e in &self.edges {
            writeln!(out, "{} {} {} {}", e.from, e.to, e.capacity, e.cost)?;
        }
        Ok(())
    }

    /// Reads the format produced by [`FlowNetwork::write_edge_list`].
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let field = |name: &str| -> Result<usize> {
            header
                .split_whitespace()
                .find_map(|tok| tok.strip_prefix(name).and_then(|v| v.strip_prefix('=')))
                .and_then(|v| v.parse().ok())
                .ok_or(Error::Parse {
                    line: 1,
                    message: format!("header lacks {name}"),
                })
        };
        let mut net = FlowNetwork::new(field("vertices")?, field("source")?, field("sink")?)?;
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            let [from, to, cap, cost] = nums[..] else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected `from to cap cost`".into(),
                });
            };
            let n = net.vertex_count as i64;
            if !(0..n).contains(&from) || !(0..n).contains(&to) || cap < 0 || cost < 0 {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "edge out of range or negative".into(),
                });
            }
            net.add_edge(from as usize, to as usize, cap, cost);
        }
        Ok(net)
    }
}

/// An integral flow on a [`FlowNetwork`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowResult {
    pub flow: Vec<i64>,
    pub value: i64,
    pub cost: i64,
}

impl FlowResult {
    /// Checks capacity bounds, conservation and the reported value/cost.
    pub fn check(&self, net: &FlowNetwork) -> Result<()> {
        if self.flow.len() != net.edges.len() {
            return Err(Error::Internal("flow vector length mismatch".into()));
        }
        let mut balance = vec![0i64; net.vertex_count];
        let mut cost = 0;
        for (e, &f) in net.edges.iter().zip(&self.flow) {
            if f < 0 || f > e.capacity {
                return Err(Error::Internal(format!("flow {f} violates capacity on {e:?}")));
            }
            balance[e.from] -= f;
            balance[e.to] += f;
            cost += f * e.cost;
        }
        for (v, &b) in balance.iter().enumerate() {
            if v != net.source && v != net.sink && b != 0 {
                return Err(Error::Internal(format!("conservation violated at vertex {v}")));
            }
        }
        if -balance[net.source] != self.value {
            return Err(Error::Internal("value differs from net source outflow".into()));
        }
        if cost != self.cost {
            return Err(Error::Internal("cost differs from sum of flow * cost".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let mut net = FlowNetwork::new(3, 0, 2).unwrap();
        net.add_edge(0, 1, 2, 3);
        net.add_edge(1, 2, 1, 0);
        let mut buf = Vec::new();
        net.write_edge_list(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# vertices=3 source=0 sink=2\n0 1 2 3\n1 2 1 0\n");
        assert_eq!(FlowNetwork::parse_edge_list(&text).unwrap(), net);
    }

    #[test]
    fn rejects_bad_networks() {
        assert!(FlowNetwork::new(2, 1, 1).is_err());
        assert!(FlowNetwork::new(2, 0, 2).is_err());
        assert!(FlowNetwork::parse_edge_list("# vertices=2 source=0 sink=1\n0 5 1 1\n").is_err());
        assert!(FlowNetwork::parse_edge_list("# vertices=2 source=0 sink=1\n0 1 -1 1\n").is_err());
    }
}
