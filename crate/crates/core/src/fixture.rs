//! The bundled music database (tracks, distributors, charts).

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::catalog::{DatabaseCatalog, Vocabulary};

pub const MUSIC_SCHEMA: &str = include_str!("../../../data/music/schema.json");
pub const MUSIC_TRACKS: &str = include_str!("../../../data/music/tracks.csv");
pub const MUSIC_DISTRIBUTORS: &str = include_str!("../../../data/music/distributors.csv");
pub const MUSIC_CHARTS: &str = include_str!("../../../data/music/charts.csv");
pub const MUSIC_VOCABULARY: &str = include_str!("../../../data/music/vocabulary.json");

/// The music catalog with its default vocabulary.
pub fn music() -> &'static DatabaseCatalog {
    static MUSIC: OnceLock<DatabaseCatalog> = OnceLock::new();
    MUSIC.get_or_init(|| {
        let files: HashMap<String, String> = [
            ("tracks", MUSIC_TRACKS),
            ("distributors", MUSIC_DISTRIBUTORS),
            ("charts", MUSIC_CHARTS),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        let vocabulary = Vocabulary::from_json(MUSIC_VOCABULARY).expect("bundled vocabulary");
        DatabaseCatalog::from_sources("music", MUSIC_SCHEMA, &files, vocabulary)
            .expect("bundled music database")
    })
}
