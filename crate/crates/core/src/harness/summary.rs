use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{Optimizer, RunReport};
use crate::stats::{mean, population_std, welch_t_test};

/// Significance of the guided optimizer against the cell it is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mark {
    /// Guided search is significantly better than this cell.
    Improvement,
    /// Guided search is significantly worse than this cell.
    Degradation,
}

impl Mark {
    pub fn symbol(self) -> char {
        match self {
            Mark::Improvement => '•',
            Mark::Degradation => '◦',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub optimizer: Optimizer,
    /// Test instance-F values, sorted.
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (divides by N).
    pub std: f64,
    pub mark: Option<Mark>,
}

impl Cell {
    pub fn text(&self) -> String {
        let mark = self.mark.map_or(String::new(), |m| format!(" {}", m.symbol()));
        format!("{:.2}±{:.2}{mark}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub dataset: String,
    pub budget: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

const HEADER: &str = "test instance F, mean±std over runs (population std, divides by N); \
                      • / ◦ on a random-search cell: guided search significantly better / worse \
                      (Welch t-test, p < 0.05)";

/// Groups reports by dataset, budget and optimizer. The result depends only
/// on the set of reports, not their order.
pub fn summarize(reports: &[RunReport]) -> Summary {
    let mut groups: BTreeMap<(String, String), BTreeMap<&'static str, (Optimizer, Vec<f64>)>> = BTreeMap::new();
    for r in reports {
        let opt = r.config.optimizer;
        groups
            .entry((r.dataset.clone(), r.budget.clone()))
            .or_default()
            .entry(opt.name())
            .or_insert_with(|| (opt, Vec::new()))
            .1
            .push(r.test.instance_f_measure);
    }
    let rows = groups
        .into_iter()
        .map(|((dataset, budget), cells)| {
            let mut cells: Vec<Cell> = cells
                .into_values()
                .map(|(optimizer, mut values)| {
                    values.sort_by(f64::total_cmp);
                    Cell {
                        optimizer,
                        mean: mean(&values),
                        std: population_std(&values),
                        values,
                        mark: None,
                    }
                })
                .collect();
            if let Some(guided) = cells.iter().find(|c| c.optimizer == Optimizer::Mlplan).cloned() {
                for cell in cells.iter_mut().filter(|c| c.optimizer != Optimizer::Mlplan) {
                    cell.mark = significance(&guided, cell);
                }
            }
            SummaryRow { dataset, budget, cells }
        })
        .collect();
    Summary { rows }
}

fn significance(guided: &Cell, other: &Cell) -> Option<Mark> {
    let w = welch_t_test(&guided.values, &other.values).ok()?;
    if w.p >= 0.05 {
        return None;
    }
    Some(if guided.mean > other.mean {
        Mark::Improvement
    } else {
        Mark::Degradation
    })
}

impl Summary {
    fn optimizers(&self) -> Vec<Optimizer> {
        let mut out: Vec<Optimizer> = self.rows.iter().flat_map(|r| r.cells.iter().map(|c| c.optimizer)).collect();
        out.sort_by_key(|o| o.name());
        out.dedup();
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,budget,optimizer,runs,mean,std_population,mark\n");
        for row in &self.rows {
            for c in &row.cells {
                let mark = c.mark.map_or(String::new(), |m| m.symbol().to_string());
                writeln!(
                    out,
                    "{},{},{},{},{:.6},{:.6},{mark}",
                    row.dataset,
                    row.budget,
                    c.optimizer.name(),
                    c.values.len(),
                    c.mean,
                    c.std
                )
                .expect("string write");
            }
        }
        out
    }

    /// Aligned table, one line per dataset and budget, one column per optimizer.
    pub fn to_text(&self) -> String {
        let optimizers = self.optimizers();
        let mut table: Vec<Vec<String>> = vec![["dataset", "budget"]
            .into_iter()
            .map(String::from)
            .chain(optimizers.iter().map(|o| o.name().to_string()))
            .collect()];
        for row in &self.rows {
            let mut line = vec![row.dataset.clone(), row.budget.clone()];
            for o in &optimizers {
                line.push(row.cells.iter().find(|c| c.optimizer == *o).map_or("-".into(), Cell::text));
            }
            table.push(line);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|j| table.iter().map(|l| l[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = format!("# {HEADER}\n");
        for line in &table {
            let cols: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count())))
                .collect();
            writeln!(out, "{}", cols.join("  ").trim_end()).expect("string write");
        }
        out
    }
}
