//! Topology- and activity-based comparison measurements.

mod betweenness;
mod community;
mod rank;

pub use betweenness::betweenness;
pub use community::{community_centrality, label_propagation, Communities};
pub use rank::{pagerank, twitterrank, load_topic_sim, RankConfig, RankResult, TopicSimilarity};

use crate::cascade::DiffusionEvent;
use crate::graph::SocialGraph;
use crate::scores::{CentralityVector, Metric};

/// Follower counts.
pub fn in_degree(g: &SocialGraph) -> CentralityVector {
    CentralityVector::new(Metric::InDegree, g.users().map(|u| g.in_degree(u) as f64).collect())
}

/// Number of accounts each user follows.
pub fn out_degree(g: &SocialGraph) -> CentralityVector {
    CentralityVector::new(Metric::OutDegree, g.users().map(|u| g.out_degree(u) as f64).collect())
}

/// Events (originals and retweets) per user. Users outside `0..n` are ignored.
pub fn activity(n: usize, events: &[DiffusionEvent]) -> CentralityVector {
    let mut counts = vec![0.0; n];
    for e in events {
        if let Some(c) = counts.get_mut(e.user.index()) {
            *c += 1.0;
        }
    }
    CentralityVector::new(Metric::Activity, counts)
}

/// splitmix64 finalizer, used wherever a stateless seeded hash is needed.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphBuilder, UserId};

    #[test]
    fn activity_counts_all_events() {
        let u = UserId(0);
        let mut ev = Vec::new();
        for i in 0..3 {
            ev.push(DiffusionEvent::original(u, i, format!("o{i}")));
        }
        for i in 0..2 {
            ev.push(DiffusionEvent::retweet(u, 10 + i, format!("r{i}"), "o0"));
        }
        let a = activity(2, &ev);
        assert_eq!(a.values, vec![5.0, 0.0]);
    }

    #[test]
    fn degree_sums_equal_edge_count() {
        let mut b = GraphBuilder::new();
        for (f, e) in [("a", "b"), ("b", "c"), ("c", "a"), ("d", "a"), ("a", "d")] {
            b.add_follow(f, e);
        }
        let (g, _) = b.build();
        let i: f64 = in_degree(&g).values.iter().sum();
        let o: f64 = out_degree(&g).values.iter().sum();
        assert_eq!(i as usize, g.edge_count());
        assert_eq!(o as usize, g.edge_count());
    }
}
