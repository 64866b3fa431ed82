//! Python bindings for `sortflow`.

use std::sync::Arc;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sortflow::domain::{self, AgentSpec, GridMap, OneShotInstance, SlotRef};
use sortflow::flow::{max_flow, min_cost_max_flow, FlowNetwork};
use sortflow::hungarian::{hungarian_min_cost_matching, CostMatrix};
use sortflow::lifelong::{default_q, run, solve_stride, Algorithm, SimConfig};
use sortflow::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Grid map parsed from text (`.` free, `@` obstacle, `T` target, `B` bin).
#[pyclass(name = "GridMap", frozen)]
struct PyGridMap {
    inner: Arc<GridMap>,
}

#[pymethods]
impl PyGridMap {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(PyGridMap {
            inner: Arc::new(GridMap::parse(text).map_err(py_err)?),
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        Self::new(&text)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    /// Target cells of the stations as `(row, col)`, by station index.
    fn stations(&self) -> Vec<(usize, usize)> {
        self.inner.stations().iter().map(|&c| self.inner.coords(c)).collect()
    }

    fn bins(&self) -> Vec<(usize, usize)> {
        self.inner.bins().iter().map(|&c| self.inner.coords(c)).collect()
    }

    /// Shortest-path length between two cells, or `None` if unreachable.
    fn distance(&self, a: (usize, usize), b: (usize, usize)) -> PyResult<Option<u32>> {
        let a = self.cell(a)?;
        let b = self.cell(b)?;
        Ok(self.inner.distances_from(a)[b.index()])
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "GridMap(height={}, width={}, stations={}, bins={})",
            self.inner.height(),
            self.inner.width(),
            self.inner.station_count(),
            self.inner.bins().len()
        )
    }
}

impl PyGridMap {
    fn cell(&self, (row, col): (usize, usize)) -> PyResult<domain::Cell> {
        self.inner
            .cell(row, col)
            .ok_or_else(|| PyValueError::new_err(format!("({row}, {col}) is outside the map")))
    }
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(py_err)
}

/// Solves one instance. `agents` holds `(row, col, start_time)` triples.
/// Returns a dict with `idle_time`, `assignment` (station and slot per
/// agent, `None` for NULL), `paths` (list of `(time, row, col)` per agent)
/// and `demoted`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (map, agents, processing_time, slots, algorithm = "pito-l", q = None, seed = 0))]
fn solve_oneshot<'py>(
    py: Python<'py>,
    map: &PyGridMap,
    agents: Vec<(usize, usize, u32)>,
    processing_time: u32,
    slots: u32,
    algorithm: &str,
    q: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let algorithm = parse_algorithm(algorithm)?;
    let specs = agents
        .iter()
        .enumerate()
        .map(|(id, &(row, col, start_time))| {
            Ok(AgentSpec {
                id,
                start_cell: map.cell((row, col))?,
                start_time,
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let instance = OneShotInstance::new(map.inner.clone(), specs, processing_time, slots).map_err(py_err)?;
    let q = q.unwrap_or_else(|| default_q(agents.len(), map.inner.station_count()));
    let solution = py
        .detach(|| solve_stride(&instance, algorithm, q, seed))
        .map_err(py_err)?
        .solution;

    let assignment: Vec<Option<(usize, u32)>> = solution
        .assignment
        .slots
        .iter()
        .map(|s| s.map(|s| (s.station, s.slot)))
        .collect();
    let paths: Vec<Option<Vec<(u32, usize, usize)>>> = (0..instance.agents.len())
        .map(|id| {
            solution.path_of(id).map(|p| {
                p.entries()
                    .map(|(t, c)| {
                        let (r, col) = map.inner.coords(c);
                        (t, r, col)
                    })
                    .collect()
            })
        })
        .collect();
    let out = PyDict::new(py);
    out.set_item("idle_time", solution.total_idle_time)?;
    out.set_item("assignment", assignment)?;
    out.set_item("paths", paths)?;
    out.set_item("demoted", solution.demoted.clone())?;
    Ok(out)
}

/// Runs the lifelong simulation and returns its metrics as a dict.
#[pyfunction]
#[pyo3(signature = (map, agents = 20, algorithm = "pito-l", stride = 30, horizon = 600, processing_time = 10, slots = 9, kappa = 30, q = None, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    map: &PyGridMap,
    agents: usize,
    algorithm: &str,
    stride: u32,
    horizon: u32,
    processing_time: u32,
    slots: u32,
    kappa: u32,
    q: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let config = SimConfig {
        map: map.inner.clone(),
        agents,
        algorithm: parse_algorithm(algorithm)?,
        stride,
        horizon,
        processing_time,
        slots,
        kappa,
        q,
        seed,
    };
    let result = py.detach(|| run(&config)).map_err(py_err)?;
    let m = &result.metrics;
    let out = PyDict::new(py);
    out.set_item("total_idle_time", m.total_idle_time)?;
    out.set_item("parcels", m.parcels)?;
    out.set_item("timeline", m.timeline.clone())?;
    out.set_item("workload", m.workload)?;
    out.set_item("avg_solve_ms", m.avg_solve_ms())?;
    out.set_item("collisions", m.collisions)?;
    out.set_item("demotions", m.demotions)?;
    out.set_item("events", result.events.iter().map(|e| e.to_string()).collect::<Vec<_>>())?;
    Ok(out)
}

fn network(vertices: usize, source: usize, sink: usize, edges: &[(usize, usize, i64, i64)]) -> PyResult<FlowNetwork> {
    let mut net = FlowNetwork::new(vertices, source, sink).map_err(py_err)?;
    for &(u, v, cap, cost) in edges {
        if u >= vertices || v >= vertices {
            return Err(PyValueError::new_err(format!("edge ({u}, {v}) uses a missing vertex")));
        }
        if cap < 0 || cost < 0 {
            return Err(PyValueError::new_err(format!("edge ({u}, {v}) has a negative capacity or cost")));
        }
        net.add_edge(u, v, cap, cost);
    }
    Ok(net)
}

/// Min-cost maximum flow. Edges are `(from, to, capacity, cost)`; returns
/// `(value, cost, flow_per_edge)`.
#[pyfunction]
fn min_cost_flow(vertices: usize, source: usize, sink: usize, edges: Vec<(usize, usize, i64, i64)>) -> PyResult<(i64, i64, Vec<i64>)> {
    let net = network(vertices, source, sink, &edges)?;
    let r = min_cost_max_flow(&net);
    Ok((r.value, r.cost, r.flow))
}

/// Maximum flow value; edge costs are ignored.
#[pyfunction]
fn maximum_flow(vertices: usize, source: usize, sink: usize, edges: Vec<(usize, usize, i64, i64)>) -> PyResult<i64> {
    Ok(max_flow(&network(vertices, source, sink, &edges)?).value)
}

/// Min-cost matching of size `min(rows, cols)`; `None` marks a forbidden
/// pair. Returns `(pairs, total)`.
#[pyfunction]
fn hungarian(costs: Vec<Vec<Option<i64>>>) -> PyResult<(Vec<(usize, usize)>, i64)> {
    let cols = costs.first().map_or(0, Vec::len);
    if costs.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("rows must have equal length"));
    }
    if costs.iter().flatten().flatten().any(|&c| c < 0) {
        return Err(PyValueError::new_err("costs must be non-negative"));
    }
    let m = hungarian_min_cost_matching(&CostMatrix::from_rows(costs)).map_err(py_err)?;
    Ok((m.pairs, m.total))
}

/// Idle time `T * (N*K - occupied)` of a slot assignment given as
/// `(station, slot)` or `None` per agent.
#[pyfunction]
fn idle_time(assignment: Vec<Option<(usize, u32)>>, stations: usize, slots: u32, processing_time: u32) -> PyResult<u64> {
    let a = domain::Assignment {
        slots: assignment.into_iter().map(|s| s.map(|(st, k)| SlotRef::new(st, k))).collect(),
    };
    a.validate(stations, slots).map_err(py_err)?;
    Ok(domain::total_idle_time(&a, stations, slots, processing_time))
}

#[pymodule]
fn sortflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridMap>()?;
    m.add_function(wrap_pyfunction!(solve_oneshot, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(min_cost_flow, m)?)?;
    m.add_function(wrap_pyfunction!(maximum_flow, m)?)?;
    m.add_function(wrap_pyfunction!(hungarian, m)?)?;
    m.add_function(wrap_pyfunction!(idle_time, m)?)?;
    Ok(())
}
