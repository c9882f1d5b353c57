//! Bundled presets and groups used by the tests, the acceptance suite and
//! the command-line demos.

use crate::error::{Error, Result};
use crate::blackbox::BlackBoxGroup;
use crate::pseudofree::Preset;

pub const PRESETS: [&str; 4] = ["p1", "p2", "p3", "p4"];

pub fn preset_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "p1" => include_str!("../fixtures/presets/p1.json"),
        "p2" => include_str!("../fixtures/presets/p2.json"),
        "p3" => include_str!("../fixtures/presets/p3.json"),
        "p4" => include_str!("../fixtures/presets/p4.json"),
        _ => return None,
    })
}

pub fn preset(name: &str) -> Result<Preset> {
    let text = preset_json(name).ok_or_else(|| Error::Input(format!("no bundled preset `{name}`")))?;
    Preset::from_json(text)
}

pub const GROUPS: [&str; 7] = ["d4", "q8", "d16", "c2xc2", "s3", "s4", "trivial"];

pub fn group_json(name: &str) -> Option<&'static str> {
    Some(match name {
        "d4" => include_str!("../fixtures/groups/d4.json"),
        "q8" => include_str!("../fixtures/groups/q8.json"),
        "d16" => include_str!("../fixtures/groups/d16.json"),
        "c2xc2" => include_str!("../fixtures/groups/c2xc2.json"),
        "s3" => include_str!("../fixtures/groups/s3.json"),
        "s4" => include_str!("../fixtures/groups/s4.json"),
        "trivial" => include_str!("../fixtures/groups/trivial.json"),
        _ => return None,
    })
}

pub fn group(name: &str) -> Result<BlackBoxGroup> {
    let text = group_json(name).ok_or_else(|| Error::Input(format!("no bundled group `{name}`")))?;
    BlackBoxGroup::from_json(text)
}
