//! Head annotations, multi-view merging on the head plane and the
//! social-distance compliance partition.

use std::collections::HashMap;

use thiserror::Error;

use crate::geometry::{image_to_plane, GeometryError, PlaneHomography};
use crate::grid::{CameraId, Space};

/// Default social-distance threshold, meters.
pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 2.0;
/// Default multi-view merge radius, meters.
pub const DEFAULT_MERGE_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("annotation {index} is in {found} space, expected {expected}")]
    WrongSpace {
        index: usize,
        found: Space,
        expected: &'static str,
    },
    #[error("annotation {index} belongs to camera {found:?}, homography is for camera {expected:?}")]
    CameraMismatch {
        index: usize,
        found: Option<CameraId>,
        expected: Option<CameraId>,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A person's head position in image pixels or head-plane meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadAnnotation {
    pub frame_id: u64,
    pub position: [f64; 2],
    pub space: Space,
    pub person_id: Option<u64>,
}

impl HeadAnnotation {
    pub fn plane(frame_id: u64, x: f64, y: f64) -> Self {
        Self {
            frame_id,
            position: [x, y],
            space: Space::Plane,
            person_id: None,
        }
    }

    pub fn image(frame_id: u64, camera: CameraId, u: f64, v: f64) -> Self {
        Self {
            frame_id,
            position: [u, v],
            space: Space::Image(camera),
            person_id: None,
        }
    }

    pub fn with_person(mut self, person_id: u64) -> Self {
        self.person_id = Some(person_id);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ComplianceLabel {
    /// Farther than the threshold from everyone else.
    Sdc,
    /// Within the threshold of at least one other person.
    Nsdc,
}

impl ComplianceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ComplianceLabel::Sdc => "SDC",
            ComplianceLabel::Nsdc => "NSDC",
        }
    }
}

/// Split of a head set into compliant and non-compliant persons.
///
/// `distances[i]` and `labels[i]` refer to the i-th input annotation; `sdc`
/// and `nsdc` keep input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompliancePartition {
    pub sdc: Vec<HeadAnnotation>,
    pub nsdc: Vec<HeadAnnotation>,
    pub threshold: f64,
    pub distances: Vec<f64>,
    pub labels: Vec<ComplianceLabel>,
}

fn require_plane(heads: &[HeadAnnotation]) -> Result<(), AnnotationError> {
    match heads.iter().position(|h| !h.space.is_plane()) {
        Some(index) => Err(AnnotationError::WrongSpace {
            index,
            found: heads[index].space,
            expected: "plane",
        }),
        None => Ok(()),
    }
}

#[inline]
pub(crate) fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

/// Labels each person by its nearest-neighbor distance `d_i`: compliant iff
/// `d_i > threshold`. A person alone has `d_i = ∞`.
pub fn classify_compliance(
    heads: &[HeadAnnotation],
    threshold: f64,
) -> Result<CompliancePartition, AnnotationError> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(AnnotationError::InvalidParameter(format!(
            "distance threshold must be positive, got {threshold}"
        )));
    }
    require_plane(heads)?;
    if let Some(i) = heads.iter().position(|h| !h.is_finite()) {
        let p = heads[i].position;
        return Err(GeometryError::NonFinite(p[0], p[1]).into());
    }

    let distances = nearest_neighbor_distances(heads, threshold);
    let labels: Vec<ComplianceLabel> = distances
        .iter()
        .map(|&d| {
            if d > threshold {
                ComplianceLabel::Sdc
            } else {
                ComplianceLabel::Nsdc
            }
        })
        .collect();
    let (mut sdc, mut nsdc) = (Vec::new(), Vec::new());
    for (h, l) in heads.iter().zip(&labels) {
        match l {
            ComplianceLabel::Sdc => sdc.push(*h),
            ComplianceLabel::Nsdc => nsdc.push(*h),
        }
    }
    Ok(CompliancePartition {
        sdc,
        nsdc,
        threshold,
        distances,
        labels,
    })
}

/// Exact nearest-neighbor distance of every point, found by ring search over
/// a uniform bucket grid with cell side `cell`.
fn nearest_neighbor_distances(heads: &[HeadAnnotation], cell: f64) -> Vec<f64> {
    let n = heads.len();
    if n < 2 {
        return vec![f64::INFINITY; n];
    }
    let key = |p: [f64; 2]| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let (mut min_k, mut max_k) = ((i64::MAX, i64::MAX), (i64::MIN, i64::MIN));
    for (i, h) in heads.iter().enumerate() {
        let k = key(h.position);
        min_k = (min_k.0.min(k.0), min_k.1.min(k.1));
        max_k = (max_k.0.max(k.0), max_k.1.max(k.1));
        buckets.entry(k).or_default().push(i);
    }
    let max_ring = (max_k.0 - min_k.0).max(max_k.1 - min_k.1);

    heads
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let (kx, ky) = key(h.position);
            let mut best = f64::INFINITY;
            let scan = |bx: i64, by: i64, best: &mut f64| {
                if let Some(ids) = buckets.get(&(bx, by)) {
                    for &j in ids {
                        if j != i {
                            *best = best.min(distance(h.position, heads[j].position));
                        }
                    }
                }
            };
            scan(kx, ky, &mut best);
            for ring in 1..=max_ring {
                for dx in -ring..=ring {
                    scan(kx + dx, ky - ring, &mut best);
                    scan(kx + dx, ky + ring, &mut best);
                }
                for dy in (-ring + 1)..ring {
                    scan(kx - ring, ky + dy, &mut best);
                    scan(kx + ring, ky + dy, &mut best);
                }
                // every point within `ring · cell` has now been visited
                if best <= ring as f64 * cell {
                    break;
                }
            }
            best
        })
        .collect()
}

/// One merged head with the view/index pairs it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedHead {
    pub head: HeadAnnotation,
    /// `(view index, index within view)` of every member, sorted.
    pub members: Vec<(usize, usize)>,
}

/// Fuses per-view head-plane annotation sets into one set.
///
/// Cross-view pairs closer than `radius` are joined greedily, nearest pair
/// first. Two groups merge only if they come from disjoint views, share a
/// frame, and every cross pair stays within `radius`. Each group is replaced
/// by its centroid; annotations seen in a single view pass through.
pub fn merge_views(
    per_view: &[Vec<HeadAnnotation>],
    radius: f64,
) -> Result<Vec<HeadAnnotation>, AnnotationError> {
    Ok(merge_views_with_members(per_view, radius)?
        .into_iter()
        .map(|m| m.head)
        .collect())
}

/// [`merge_views`] that also reports cluster membership.
pub fn merge_views_with_members(
    per_view: &[Vec<HeadAnnotation>],
    radius: f64,
) -> Result<Vec<MergedHead>, AnnotationError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(AnnotationError::InvalidParameter(format!(
            "merge radius must be positive, got {radius}"
        )));
    }
    let mut items: Vec<(usize, usize, HeadAnnotation)> = Vec::new();
    for (v, view) in per_view.iter().enumerate() {
        for (i, h) in view.iter().enumerate() {
            if !h.space.is_plane() {
                return Err(AnnotationError::WrongSpace {
                    index: items.len(),
                    found: h.space,
                    expected: "plane",
                });
            }
            items.push((v, i, *h));
        }
    }
    let n = items.len();

    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let (va, _, ha) = &items[a];
            let (vb, _, hb) = &items[b];
            if va == vb || ha.frame_id != hb.frame_id {
                continue;
            }
            let d = distance(ha.position, hb.position);
            if d <= radius {
                pairs.push((d, a, b));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    // cluster of each item; clusters as member lists
    let mut owner: Vec<usize> = (0..n).collect();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for (_, a, b) in pairs {
        let (ca, cb) = (owner[a], owner[b]);
        if ca == cb {
            continue;
        }
        let compatible = clusters[ca].iter().all(|&x| {
            clusters[cb].iter().all(|&y| {
                items[x].0 != items[y].0 && distance(items[x].2.position, items[y].2.position) <= radius
            })
        });
        if !compatible {
            continue;
        }
        let (keep, drop) = (ca.min(cb), ca.max(cb));
        let moved = std::mem::take(&mut clusters[drop]);
        for &m in &moved {
            owner[m] = keep;
        }
        clusters[keep].extend(moved);
    }

    let mut out = Vec::new();
    for mut members in clusters.into_iter().filter(|c| !c.is_empty()) {
        members.sort_unstable();
        let k = members.len() as f64;
        let (sx, sy) = members.iter().fold((0.0, 0.0), |(sx, sy), &m| {
            (sx + items[m].2.position[0], sy + items[m].2.position[1])
        });
        let first = items[members[0]].2;
        let person_id = members.iter().find_map(|&m| items[m].2.person_id);
        out.push(MergedHead {
            head: HeadAnnotation {
                frame_id: first.frame_id,
                position: [sx / k, sy / k],
                space: Space::Plane,
                person_id,
            },
            members: members.iter().map(|&m| (items[m].0, items[m].1)).collect(),
        });
    }
    Ok(out)
}

/// Projects image annotations of the homography's camera onto the head plane.
pub fn project_annotations(
    heads: &[HeadAnnotation],
    hom: &PlaneHomography,
) -> Result<Vec<HeadAnnotation>, AnnotationError> {
    heads
        .iter()
        .enumerate()
        .map(|(index, h)| {
            let Space::Image(cam) = h.space else {
                return Err(AnnotationError::WrongSpace {
                    index,
                    found: h.space,
                    expected: "image",
                });
            };
            if hom.camera().is_some_and(|c| c != cam) {
                return Err(AnnotationError::CameraMismatch {
                    index,
                    found: Some(cam),
                    expected: hom.camera(),
                });
            }
            Ok(HeadAnnotation {
                position: image_to_plane(h.position, hom)?,
                space: Space::Plane,
                ..*h
            })
        })
        .collect()
}
