//! Bundled experiment presets, usable anywhere a config path is accepted.

pub const PRESETS: &[(&str, &str)] = &[
    (
        "theorem31_p2",
        include_str!("../../presets/theorem31_p2.conf"),
    ),
    (
        "linear_sup_decay",
        include_str!("../../presets/linear_sup_decay.conf"),
    ),
    ("demo", include_str!("../../presets/demo.conf")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
