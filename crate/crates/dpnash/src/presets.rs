//! Built-in scenarios, shipped as the data files under `presets/`.

pub struct Preset {
    pub name: &'static str,
    pub text: &'static str,
}

pub const CONFIGS: &[Preset] = &[
    Preset {
        name: "ieee30-6p",
        text: include_str!("../presets/ieee30-6p.json"),
    },
    Preset {
        name: "density-10p-low",
        text: include_str!("../presets/density-10p-low.json"),
    },
    Preset {
        name: "density-10p-mid",
        text: include_str!("../presets/density-10p-mid.json"),
    },
    Preset {
        name: "density-10p-high",
        text: include_str!("../presets/density-10p-high.json"),
    },
];

pub const GAMES: &[Preset] = &[
    Preset {
        name: "ieee30-6p",
        text: include_str!("../presets/games/ieee30-6p.json"),
    },
    Preset {
        name: "bus-10p",
        text: include_str!("../presets/games/bus-10p.json"),
    },
];

pub const TOPOLOGIES: &[Preset] = &[
    Preset {
        name: "fig1-6p",
        text: include_str!("../presets/topologies/fig1-6p.topo"),
    },
    Preset {
        name: "density-10p-low",
        text: include_str!("../presets/topologies/density-10p-low.topo"),
    },
    Preset {
        name: "density-10p-mid",
        text: include_str!("../presets/topologies/density-10p-mid.topo"),
    },
    Preset {
        name: "density-10p-high",
        text: include_str!("../presets/topologies/density-10p-high.topo"),
    },
];

pub fn find(table: &'static [Preset], name: &str) -> Option<&'static Preset> {
    table.iter().find(|p| p.name == name)
}

pub fn config_names() -> impl Iterator<Item = &'static str> {
    CONFIGS.iter().map(|p| p.name)
}
