#![allow(dead_code)]

use dirtask_core::scenario::{
    ContainerSpec, Item, LocationSpec, OcclusionSpec, PoseSpec, Scenario, ScenarioFile, UtteranceSpec,
};
use proptest::prelude::*;

const CATEGORIES: [&str; 2] = ["shirt", "mug"];
const ATTRIBUTES: [&str; 3] = ["red", "blue", "green"];

/// Small random scenarios without a family. Invalid draws are filtered out.
pub fn scenario() -> impl Strategy<Value = Scenario> {
    (2usize..=4)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec((0usize..2, 0usize..3, 0..n, proptest::option::of(any::<bool>())), 1..=4),
                proptest::option::of((0..n, any::<bool>())),
                0..n,
                0..n,
                proptest::collection::btree_set(0..n, 0..n),
                proptest::collection::btree_set(0..n, 0..n),
                any::<bool>(),
            )
        })
        .prop_filter_map("structurally invalid", |(n, items, container, d, m, dmask, mmask, named)| {
            let mut locations: Vec<LocationSpec> = (0..n)
                .map(|index| LocationSpec {
                    index,
                    label: None,
                    surface_items: vec![],
                })
                .collect();
            let mut containers = vec![];
            if let Some((at, open)) = container {
                containers.push(ContainerSpec {
                    id: "box".into(),
                    location: at,
                    contents: vec![],
                    is_open: open,
                });
            }
            let mut catalog = vec![];
            for (i, (cat, attr, at, in_box)) in items.iter().enumerate() {
                let id = format!("it{i}");
                catalog.push(Item {
                    id: id.as_str().into(),
                    category: CATEGORIES[*cat].into(),
                    attribute: ATTRIBUTES[*attr].into(),
                });
                match (in_box, containers.first_mut()) {
                    (Some(true), Some(c)) => c.contents.push(id.as_str().into()),
                    _ => locations[*at].surface_items.push(id.as_str().into()),
                }
            }
            let target = catalog[0].clone();
            let dmask: Vec<usize> = dmask
                .into_iter()
                .filter(|&l| l != d && l.abs_diff(d) <= 1)
                .collect();
            let file = ScenarioFile {
                id: "random".into(),
                family: None,
                locations,
                items: catalog,
                containers,
                poses: PoseSpec { director: d, matcher: m },
                occlusion_masks: OcclusionSpec {
                    director: dmask,
                    matcher: mmask.into_iter().collect(),
                },
                target_id: target.id.clone(),
                distractor_id: None,
                director_utterance: UtteranceSpec {
                    text: format!("Please pass me the {}.", target.category),
                    category: target.category.clone(),
                    attribute: named.then(|| target.attribute.clone()),
                },
            };
            file.into_scenario().ok()
        })
}
