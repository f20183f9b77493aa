use super::domain::PlanarDomain;
use super::wire::V2;
use crate::mesh::{ProjectedLocator, TriSurface};

/// Outcome of the projection test: how many sample lines missed the surface
/// and the first offending point.
#[derive(Debug, Clone)]
pub struct SpanningReport {
    pub samples: usize,
    pub misses: usize,
    pub first_miss: Option<V2>,
}

impl SpanningReport {
    pub fn passed(&self) -> bool {
        self.misses == 0
    }
}

/// Casts vertical lines through `n_samples` quasi-random points of `domain`
/// and counts those that meet no triangle of `surface`.
pub fn spanning_report(surface: &TriSurface, domain: &PlanarDomain, n_samples: usize) -> SpanningReport {
    let n = n_samples.max(100);
    let locator = ProjectedLocator::new(surface);
    let mut misses = 0;
    let mut first_miss = None;
    for p in domain.sample_points(n) {
        if locator.locate(p).is_none() {
            misses += 1;
            first_miss.get_or_insert(p);
        }
    }
    SpanningReport {
        samples: n,
        misses,
        first_miss,
    }
}

/// True iff every sampled vertical line through `domain` hits `surface`.
pub fn spanning_check(surface: &TriSurface, domain: &PlanarDomain, n_samples: usize) -> bool {
    spanning_report(surface, domain, n_samples).passed()
}
