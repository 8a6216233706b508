//! Arm models derived from a user/article ratings log.
//!
//! Articles of each group are sorted by mean rating and cut into `k_i`
//! buckets; each bucket is one arm. A user is one context, and the raw mean
//! of bucket `h` of group `i` for user `u` is `q_i^u * rho_{i,h}` where
//! `q_i^u` is the fraction of the user's views that fall in group `i`. Raw
//! means are mapped per context onto `[0.1, 0.9]`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{normalize_means, ArmModel, Noise};
use crate::constraints::GroupStructure;
use crate::{Error, Result};

/// Articles per day in each group of the news-reading study.
pub const DEFAULT_ARMS_PER_GROUP: [usize; 7] = [26, 18, 12, 12, 7, 3, 3];

pub const DEFAULT_GROUP_NAMES: [&str; 7] = [
    "Science",
    "Entertainment",
    "Business",
    "World",
    "Politics",
    "Sports",
    "USA",
];

/// Users with fewer retained views than this are dropped.
pub const DEFAULT_MIN_VIEWS: usize = 100;

const NOISE_SD: f64 = 0.05;

/// One view. `rating` is `None` when the user left no rating.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingRow {
    pub user: String,
    pub article: String,
    pub rating: Option<f64>,
    pub category: String,
}

/// A ratings log plus the map from category labels to group names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RatingsTable {
    pub rows: Vec<RatingRow>,
    pub ontology: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcludedUser {
    pub user: String,
    pub views: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetModel {
    pub model: ArmModel,
    pub group_names: Vec<String>,
    /// Article ids of each arm, group-major, lowest-rated bucket first.
    pub buckets: Vec<Vec<String>>,
    /// Mean rating of each arm's bucket.
    pub bucket_scores: Vec<f64>,
    pub excluded_users: Vec<ExcludedUser>,
    /// Articles without a unique group, or with no explicit rating.
    pub dropped_articles: usize,
}

/// Sizes of `buckets` consecutive buckets over `n` sorted items, extra items
/// going to the lowest buckets.
pub(crate) fn bucket_sizes(n: usize, buckets: usize) -> Vec<usize> {
    let base = n / buckets;
    let extra = n % buckets;
    (0..buckets).map(|h| base + usize::from(h < extra)).collect()
}

pub fn build_dataset_model(
    table: &RatingsTable,
    group_names: &[String],
    arms_per_group: &[usize],
    min_views: usize,
) -> Result<DatasetModel> {
    if group_names.len() != arms_per_group.len() {
        return Err(Error::LengthMismatch {
            expected: group_names.len(),
            found: arms_per_group.len(),
        });
    }
    if arms_per_group.contains(&0) {
        return Err(Error::Dataset("every group needs at least one arm".into()));
    }
    let group_of_name: BTreeMap<&str, usize> =
        group_names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();

    // groups each article is labelled with, and its explicit ratings
    let mut labels: BTreeMap<&str, BTreeSet<Option<usize>>> = BTreeMap::new();
    let mut ratings: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for row in &table.rows {
        let group = table
            .ontology
            .get(&row.category)
            .and_then(|g| group_of_name.get(g.as_str()).copied());
        labels.entry(&row.article).or_default().insert(group);
        if let Some(r) = row.rating {
            if !(0.0..=5.0).contains(&r) {
                return Err(Error::Dataset(format!("rating {r} outside [0, 5] for {}", row.article)));
            }
            let e = ratings.entry(&row.article).or_insert((0.0, 0));
            e.0 += r;
            e.1 += 1;
        }
    }

    let g = group_names.len();
    let mut article_group: BTreeMap<&str, usize> = BTreeMap::new();
    let mut members: Vec<Vec<(&str, f64)>> = vec![Vec::new(); g];
    let mut dropped = 0;
    for (article, groups) in &labels {
        let unique = match (groups.len(), groups.iter().next()) {
            (1, Some(Some(i))) => Some(*i),
            _ => None,
        };
        match (unique, ratings.get(article)) {
            (Some(i), Some(&(sum, n))) => {
                article_group.insert(article, i);
                members[i].push((article, sum / n as f64));
            }
            _ => dropped += 1,
        }
    }

    let mut buckets = Vec::new();
    let mut bucket_scores = Vec::new();
    for (i, arts) in members.iter_mut().enumerate() {
        let k_i = arms_per_group[i];
        if arts.len() < k_i {
            return Err(Error::Dataset(format!(
                "group {} has {} usable articles but needs {k_i}",
                group_names[i],
                arts.len()
            )));
        }
        arts.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        let mut start = 0;
        for size in bucket_sizes(arts.len(), k_i) {
            let slice = &arts[start..start + size];
            buckets.push(slice.iter().map(|(a, _)| a.to_string()).collect());
            bucket_scores.push(slice.iter().map(|(_, r)| r).sum::<f64>() / size as f64);
            start += size;
        }
    }

    // distinct retained articles viewed per user and group
    let mut viewed: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for row in &table.rows {
        let seen = viewed.entry(&row.user).or_default();
        if article_group.contains_key(row.article.as_str()) {
            seen.insert(&row.article);
        }
    }
    let threshold = min_views.max(1);
    let mut contexts = Vec::new();
    let mut means = Vec::new();
    let mut excluded_users = Vec::new();
    for (user, arts) in &viewed {
        if arts.len() < threshold {
            excluded_users.push(ExcludedUser {
                user: user.to_string(),
                views: arts.len(),
            });
            continue;
        }
        let mut q = vec![0.0; g];
        for a in arts {
            q[article_group[a]] += 1.0;
        }
        q.iter_mut().for_each(|x| *x /= arts.len() as f64);
        let mut raw = Vec::with_capacity(bucket_scores.len());
        let mut arm = 0;
        for (i, &k_i) in arms_per_group.iter().enumerate() {
            for _ in 0..k_i {
                raw.push(q[i] * bucket_scores[arm]);
                arm += 1;
            }
        }
        contexts.push(user.to_string());
        means.push(normalize_means(&raw));
    }
    if contexts.is_empty() {
        return Err(Error::Dataset(format!("no user has at least {threshold} usable views")));
    }
    let model = ArmModel::new(
        contexts,
        means,
        Noise::TruncatedNormal { sd: NOISE_SD },
        GroupStructure::partition_from_sizes(arms_per_group)?,
    )?;
    Ok(DatasetModel {
        model,
        group_names: group_names.to_vec(),
        buckets,
        bucket_scores,
        excluded_users,
        dropped_articles: dropped,
    })
}

/// Parameters of a synthetic ratings log with the shape of a news-reading
/// study: latent article quality per group, per-user group affinities, and
/// noisy integer ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticRatings {
    pub users: usize,
    pub group_names: Vec<String>,
    pub articles_per_group: Vec<usize>,
    /// Mean latent rating of each group.
    pub group_quality: Vec<f64>,
    pub views_per_user: usize,
    /// Probability that a view carries a rating.
    pub rating_rate: f64,
}

impl Default for SyntheticRatings {
    fn default() -> Self {
        Self {
            users: 24,
            group_names: DEFAULT_GROUP_NAMES.iter().map(|s| s.to_string()).collect(),
            articles_per_group: vec![520, 360, 240, 240, 140, 60, 60],
            group_quality: vec![3.64, 3.31, 3.64, 3.54, 3.55, 3.59, 3.48],
            views_per_user: 250,
            rating_rate: 0.9,
        }
    }
}

pub fn generate_ratings_table<R: Rng + ?Sized>(spec: &SyntheticRatings, rng: &mut R) -> Result<RatingsTable> {
    let g = spec.group_names.len();
    if spec.articles_per_group.len() != g || spec.group_quality.len() != g {
        return Err(Error::LengthMismatch {
            expected: g,
            found: spec.articles_per_group.len().min(spec.group_quality.len()),
        });
    }
    if spec.articles_per_group.contains(&0) {
        return Err(Error::Dataset("every group needs at least one article".into()));
    }
    let mut ontology = BTreeMap::new();
    for name in &spec.group_names {
        ontology.insert(format!("label:{}", name.to_lowercase()), name.clone());
    }
    let mut articles: Vec<Vec<(String, f64)>> = Vec::with_capacity(g);
    for (i, &n) in spec.articles_per_group.iter().enumerate() {
        articles.push(
            (0..n)
                .map(|j| {
                    let z: f64 = rng.sample(StandardNormal);
                    (format!("g{i}-a{j}"), (spec.group_quality[i] + 0.8 * z).clamp(0.0, 5.0))
                })
                .collect(),
        );
    }
    let mut rows = Vec::new();
    for u in 0..spec.users {
        let weights: Vec<f64> = (0..g).map(|_| -libm::log(1.0 - rng.random::<f64>())).collect();
        let total: f64 = weights.iter().sum();
        let user = format!("user{u:03}");
        for _ in 0..spec.views_per_user {
            let mut x = rng.random::<f64>() * total;
            let mut i = 0;
            while i + 1 < g && x >= weights[i] {
                x -= weights[i];
                i += 1;
            }
            let (id, quality) = &articles[i][rng.random_range(0..articles[i].len())];
            let rating = if rng.random::<f64>() < spec.rating_rate {
                let z: f64 = rng.sample(StandardNormal);
                Some(libm::round(quality + 0.7 * z).clamp(0.0, 5.0))
            } else {
                None
            };
            rows.push(RatingRow {
                user: user.clone(),
                article: id.clone(),
                rating,
                category: format!("label:{}", spec.group_names[i].to_lowercase()),
            });
        }
    }
    Ok(RatingsTable { rows, ontology })
}
