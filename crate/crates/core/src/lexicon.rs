//! Fixed word lists used by the scenario generators and the mock agents.

pub const RACKS: &[&str] = &["R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8"];
pub const AISLES: &[&str] = &["A1", "A2", "A3"];

/// Sensor families: id prefix, type word, unit.
pub const SENSOR_KINDS: &[(char, &str, &str)] =
    &[('T', "thermal", "C"), ('C', "camera", "lux"), ('L', "LiDAR", "m"), ('S', "audio", "dB")];

/// Anomaly classes with the phrase used in reports and the suggested action.
pub struct AnomalyClass {
    pub name: &'static str,
    pub phrase: &'static str,
    pub action: &'static str,
}

pub const ANOMALY_CLASSES: &[AnomalyClass] = &[
    AnomalyClass { name: "oil stain", phrase: "an oil stain on the floor", action: "cleaning" },
    AnomalyClass { name: "burned-out lighting", phrase: "burned-out lighting overhead", action: "replacement" },
    AnomalyClass { name: "dust", phrase: "dust on the shelves", action: "cleaning" },
    AnomalyClass { name: "moisture", phrase: "moisture on the wall", action: "drying" },
    AnomalyClass { name: "blocked aisle", phrase: "a blocked aisle nearby", action: "clearing" },
    AnomalyClass { name: "abnormal temperature", phrase: "abnormal temperature nearby", action: "ventilation" },
];

/// Classes the extractor knows without any task knowledge.
pub const BASE_KEY_CLASSES: &[&str] = &["oil stain", "burned-out lighting", "blocked aisle", "abnormal temperature"];

pub const HOUSEHOLD_ITEMS: &[&str] = &[
    "cup",
    "book",
    "pillow",
    "remote",
    "vase",
    "lamp",
    "shoe",
    "sock",
    "toy",
    "plate",
    "bowl",
    "bottle",
    "phone",
    "keys",
    "wallet",
    "glasses",
    "magazine",
    "blanket",
    "towel",
    "candle",
    "clock",
    "basket",
    "spoon",
    "fork",
    "newspaper",
    "umbrella",
    "hat",
    "scarf",
    "charger",
    "notebook",
];

/// Words that carry the intent of a request; never dropped by compression.
pub const COMMAND_WORDS: &[&str] = &["readings", "anomalies", "locate", "place", "confirm", "not"];

pub const ROBOT_FILLERS_CASE1: &[&str] = &[
    "Everything else in this area looks normal to me.",
    "I will keep monitoring the surroundings during the next pass.",
    "My battery level is sufficient for the remaining work.",
    "Let me know if you need more details about this area.",
    "The route through the warehouse was easy to follow.",
    "I moved slowly here to make sure the measurement is reliable.",
];

pub const ROBOT_FILLERS_CASE2: &[&str] = &[
    "The room is quiet and nothing else has changed.",
    "I moved carefully to avoid touching other objects.",
    "My battery level is sufficient for the remaining work.",
    "Let me know if you need anything else in the room.",
    "The path across the room was easy to follow.",
    "I double checked my position before reporting.",
];

pub const BS_OPENINGS: &[&str] = &["Hello robot, thank you for your help with this task."];

pub const BS_FILLERS: &[&str] = &[
    "Please take your time and be careful while moving.",
    "I will wait for your report before planning the next step.",
    "The user is counting on a complete and accurate report.",
    "Thank you again for your help with this task.",
];

/// Non-key words the compressor may shorten.
pub const ABBREVIATIONS: &[(&str, &str)] = &[
    ("thermal", "thrm"),
    ("camera", "cam"),
    ("sensor", "sns"),
    ("sensors", "snss"),
    ("LiDAR", "ldr"),
    ("audio", "aud"),
    ("rack", "rk"),
    ("recommended", "rec"),
    ("cleaning", "cln"),
    ("replacement", "repl"),
    ("ventilation", "vent"),
    ("clearing", "clr"),
    ("drying", "dry"),
    ("floor", "flr"),
    ("shelves", "shlv"),
    ("overhead", "ovh"),
    ("nearby", "nrb"),
    ("found", "fnd"),
    ("placed", "plcd"),
    ("instructed", "instr"),
    ("following", "foll"),
    ("report", "rpt"),
    ("warehouse", "whs"),
    ("together", "tog"),
    ("locations", "locs"),
    ("position", "pos"),
    ("targets", "tgts"),
    ("living", "lvg"),
    ("items", "itms"),
    ("inspect", "insp"),
];

/// Request phrasing the robot uses when it cannot act on a query.
pub const CLARIFY_GENERIC: &str = "I could not understand the request, please repeat the instruction.";
