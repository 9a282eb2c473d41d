//! A* over the 8-connected cell graph, and the crowd-sensitive variant that
//! scales each edge by `(D_m + 1) * (D_n + 1)` using normalized densities of
//! the two endpoint cells before searching.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::DensityMap;
use crate::error::{Error, Result};
use crate::geometry::{line_of_sight, CellIndex, EnvironmentMap, Grid, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub to: usize,
    pub base_weight: f64,
    pub weight: f64,
}

/// One node per grid cell (row-major ids); an edge joins two adjoining
/// cells whose centers see each other.
#[derive(Debug, Clone)]
pub struct GridGraph {
    grid: Grid,
    centers: Vec<Point>,
    adjacency: Vec<Vec<Edge>>,
}

pub fn build_graph(map: &EnvironmentMap, grid: &Grid) -> GridGraph {
    let centers: Vec<Point> = grid
        .cells()
        .map(|c| grid.cell_center(c).expect("cell from grid iterator"))
        .collect();
    let adjacency = grid
        .cells()
        .map(|cell| {
            let from = grid.id(cell);
            grid.neighbors(cell)
                .map(|n| grid.id(n))
                .filter(|&to| line_of_sight(centers[from], centers[to], map))
                .map(|to| {
                    let w = centers[from].distance(centers[to]);
                    Edge {
                        to,
                        base_weight: w,
                        weight: w,
                    }
                })
                .collect()
        })
        .collect();
    GridGraph {
        grid: *grid,
        centers,
        adjacency,
    }
}

impl GridGraph {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Directed edge count (each undirected edge is stored twice).
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    pub fn edges(&self, node: usize) -> &[Edge] {
        &self.adjacency[node]
    }

    pub fn degree(&self, cell: CellIndex) -> usize {
        self.adjacency[self.grid.id(cell)].len()
    }

    pub fn center(&self, node: usize) -> Point {
        self.centers[node]
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        self.adjacency[from].iter().find(|e| e.to == to).map(|e| e.weight)
    }

    /// Copy of the graph with every edge set to
    /// `base * (D_from + 1) * (D_to + 1)`. Always computed from the base
    /// weights, so repeated reweighting never compounds.
    pub fn reweight(&self, normalized: &[f64]) -> Result<GridGraph> {
        if normalized.len() != self.node_count() {
            return Err(Error::ShapeMismatch {
                expected: self.node_count(),
                actual: normalized.len(),
            });
        }
        if let Some((index, &value)) = normalized
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::DensityOutOfRange { index, value });
        }
        let adjacency = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(from, edges)| {
                edges
                    .iter()
                    .map(|e| Edge {
                        weight: e.base_weight * (normalized[from] + 1.0) * (normalized[e.to] + 1.0),
                        ..*e
                    })
                    .collect()
            })
            .collect();
        Ok(GridGraph {
            grid: self.grid,
            centers: self.centers.clone(),
            adjacency,
        })
    }

    /// Euclidean distance between cell centers.
    pub fn heuristic(&self, from: usize, to: usize) -> f64 {
        self.centers[from].distance(self.centers[to])
    }

    /// Total weight of a node path, summed in ascending order of edge
    /// weight so that paths using the same multiset of edges produce
    /// bit-identical totals.
    pub fn path_cost(&self, nodes: &[usize]) -> Option<f64> {
        let mut weights = nodes
            .windows(2)
            .map(|w| self.weight(w[0], w[1]))
            .collect::<Option<Vec<f64>>>()?;
        weights.sort_by(f64::total_cmp);
        Some(weights.iter().sum())
    }

    pub fn astar(&self, start: CellIndex, goal: CellIndex) -> Result<CellPath> {
        astar(self, start, goal)
    }
}

/// Result of a graph search: the visited cells from start to goal inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPath {
    pub cells: Vec<CellIndex>,
    pub cost: f64,
}

#[derive(Copy, Clone, PartialEq)]
struct Open {
    f: f64,
    g: f64,
    node: usize,
}

impl Eq for Open {}

impl Ord for Open {
    // max-heap: reverse so the smallest f (then smallest id) pops first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost path under the graph's current weights. Ties on `f` are
/// broken by the smaller row-major node id.
pub fn astar(graph: &GridGraph, start: CellIndex, goal: CellIndex) -> Result<CellPath> {
    let grid = graph.grid();
    grid.check(start)?;
    grid.check(goal)?;
    let (s, t) = (grid.id(start), grid.id(goal));
    let n = graph.node_count();
    let mut g = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    g[s] = 0.0;
    open.push(Open {
        f: graph.heuristic(s, t),
        g: 0.0,
        node: s,
    });
    while let Some(Open { g: gn, node, .. }) = open.pop() {
        if closed[node] || gn > g[node] {
            continue;
        }
        if node == t {
            let mut nodes = vec![t];
            let mut cur = t;
            while cur != s {
                cur = parent[cur];
                nodes.push(cur);
            }
            nodes.reverse();
            let cost = graph.path_cost(&nodes).expect("path follows graph edges");
            return Ok(CellPath {
                cells: nodes.into_iter().map(|id| grid.cell(id)).collect(),
                cost,
            });
        }
        closed[node] = true;
        for e in graph.edges(node) {
            if closed[e.to] {
                continue;
            }
            let cand = gn + e.weight;
            if cand < g[e.to] {
                g[e.to] = cand;
                parent[e.to] = node;
                open.push(Open {
                    f: cand + graph.heuristic(e.to, t),
                    g: cand,
                    node: e.to,
                });
            }
        }
    }
    Err(Error::NoPath { from: start, to: goal })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlannerMode {
    #[serde(rename = "astar")]
    AStar,
    #[serde(rename = "csastar")]
    CsAStar,
}

impl fmt::Display for PlannerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlannerMode::AStar => "astar",
            PlannerMode::CsAStar => "csastar",
        })
    }
}

impl FromStr for PlannerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "astar" | "a*" => Ok(PlannerMode::AStar),
            "csastar" | "csa*" => Ok(PlannerMode::CsAStar),
            other => Err(Error::InvalidParameter(format!("unknown planner {other:?}"))),
        }
    }
}

/// Waypoints toward a target: centers of the cells after the start cell,
/// with the goal cell replaced by the exact target point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub waypoints: Vec<Point>,
    pub cells: Vec<CellIndex>,
    pub total_cost: f64,
}

impl Plan {
    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y"])?;
        for p in &self.waypoints {
            w.write_record([p.x.to_string(), p.y.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Holds the distance-weighted graph for one map and answers plan queries
/// in either mode.
#[derive(Debug, Clone)]
pub struct Planner {
    base: GridGraph,
}

impl Planner {
    pub fn new(map: &EnvironmentMap, grid: &Grid) -> Self {
        Self {
            base: build_graph(map, grid),
        }
    }

    pub fn graph(&self) -> &GridGraph {
        &self.base
    }

    pub fn grid(&self) -> &Grid {
        self.base.grid()
    }

    /// Plans from `start` to `target`. In crowd-sensitive mode the density
    /// snapshot is normalized and applied to the edge weights first; a
    /// missing snapshot plans on distance alone.
    pub fn plan(
        &self,
        mode: PlannerMode,
        density: Option<&DensityMap>,
        start: Point,
        target: Point,
    ) -> Result<Plan> {
        let grid = self.base.grid();
        let from = grid.world_to_cell(start)?;
        let to = grid.world_to_cell(target)?;
        let path = match (mode, density) {
            (PlannerMode::CsAStar, Some(d)) => self.base.reweight(&d.normalized())?.astar(from, to)?,
            _ => self.base.astar(from, to)?,
        };
        Ok(plan_from_path(grid, path, target))
    }
}

fn plan_from_path(grid: &Grid, path: CellPath, target: Point) -> Plan {
    let n = path.cells.len();
    let mut waypoints: Vec<Point> = path.cells[1..n.saturating_sub(1).max(1)]
        .iter()
        .map(|&c| grid.cell_center(c).expect("path cell in grid"))
        .collect();
    waypoints.push(target);
    Plan {
        waypoints,
        cells: path.cells,
        total_cost: path.cost,
    }
}
