//! Scenario presets, compiled in from the files under `presets/`.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.conf")),
    ("fig2b", include_str!("../presets/fig2b.conf")),
    ("fig3-sphere", include_str!("../presets/fig3-sphere.conf")),
    ("fig3-disc", include_str!("../presets/fig3-disc.conf")),
    ("farfield-30k", include_str!("../presets/farfield-30k.conf")),
    (
        "farfield-au5000",
        include_str!("../presets/farfield-au5000.conf"),
    ),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}
