//! Ratings log and ontology files, and the per-context mean table.
//!
//! Ratings: CSV with header `user,article,rating,category`; an empty rating
//! is a view without a rating. Ontology: CSV with header `category,group`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use fairbandit_core::env::{ArmModel, RatingRow, RatingsTable};
use serde::{Deserialize, Serialize};

use crate::{HarnessError, Result};

#[derive(Debug, Deserialize, Serialize)]
struct RatingLine {
    user: String,
    article: String,
    rating: Option<f64>,
    category: String,
}

#[derive(Debug, Deserialize, Serialize)]
struct OntologyLine {
    category: String,
    group: String,
}

pub fn read_ratings_table(ratings: &Path, ontology: &Path) -> Result<RatingsTable> {
    let mut rows = Vec::new();
    let mut rdr = csv::Reader::from_path(ratings).map_err(|e| HarnessError::csv(ratings, e))?;
    for line in rdr.deserialize::<RatingLine>() {
        let line = line.map_err(|e| HarnessError::csv(ratings, e))?;
        rows.push(RatingRow {
            user: line.user,
            article: line.article,
            rating: line.rating,
            category: line.category,
        });
    }
    let mut map = BTreeMap::new();
    let mut rdr = csv::Reader::from_path(ontology).map_err(|e| HarnessError::csv(ontology, e))?;
    for line in rdr.deserialize::<OntologyLine>() {
        let line = line.map_err(|e| HarnessError::csv(ontology, e))?;
        if let Some(prev) = map.insert(line.category.clone(), line.group.clone()) {
            if prev != line.group {
                return Err(HarnessError::Config(format!(
                    "{}: category {:?} mapped to both {prev:?} and {:?}",
                    ontology.display(),
                    line.category,
                    line.group
                )));
            }
        }
    }
    Ok(RatingsTable { rows, ontology: map })
}

pub fn write_ratings_table(table: &RatingsTable, ratings: &Path, ontology: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(ratings).map_err(|e| HarnessError::csv(ratings, e))?;
    for r in &table.rows {
        w.serialize(RatingLine {
            user: r.user.clone(),
            article: r.article.clone(),
            rating: r.rating,
            category: r.category.clone(),
        })
        .map_err(|e| HarnessError::csv(ratings, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(ratings, e))?;
    let mut w = csv::Writer::from_path(ontology).map_err(|e| HarnessError::csv(ontology, e))?;
    for (category, group) in &table.ontology {
        w.serialize(OntologyLine {
            category: category.clone(),
            group: group.clone(),
        })
        .map_err(|e| HarnessError::csv(ontology, e))?;
    }
    w.flush().map_err(|e| HarnessError::io(ontology, e))
}

/// `context,arm,group,mean` for every context and arm.
pub fn write_means<W: Write>(model: &ArmModel, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let group_of = arm_groups(model);
    w.write_record(["context", "arm", "group", "mean"])
        .map_err(|e| HarnessError::csv("<means>", e))?;
    for (s, name) in model.contexts().iter().enumerate() {
        for (a, mu) in model.means(s)?.iter().enumerate() {
            w.write_record([name.clone(), a.to_string(), group_of[a].to_string(), mu.to_string()])
                .map_err(|e| HarnessError::csv("<means>", e))?;
        }
    }
    w.flush().map_err(|e| HarnessError::io("<means>", e))
}

fn arm_groups(model: &ArmModel) -> Vec<usize> {
    let mut out = vec![0; model.k()];
    for (i, g) in model.groups().groups().iter().enumerate() {
        for &a in g {
            out[a] = i;
        }
    }
    out
}
