//! The example queries and the SQL each should produce.

use cyrus_core::sql::QueryClass;

pub const WILDCARD: &str = "SELECT * FROM tracks";
pub const PROJECTION: &str = "SELECT TrackId, Track FROM tracks";
pub const SELECTION: &str = "SELECT * FROM tracks WHERE TrackId=1479 AND Composer='Jimi Hendrix'";
pub const COMBINED: &str =
    "SELECT Track, Media_Type, Genre FROM tracks WHERE TrackId=1479 AND Composer='Jimi Hendrix'";
pub const JOIN: &str =
    "SELECT Album, Artist FROM tracks NATURAL JOIN distributors NATURAL JOIN charts \
    WHERE Distributor='Redeye Distribution' AND Year=2017 AND Standing <= 5";
pub const DIVISION: &str =
    "SELECT Artist FROM tracks AS t WHERE (SELECT Label FROM tracks WHERE Artist = t.Artist) \
    CONTAINS (SELECT Label FROM tracks WHERE Artist = 'Gone is Gone')";
pub const AGGREGATE: &str =
    "SELECT Artist, SUM(Sales) FROM tracks NATURAL JOIN charts WHERE Year = 2017 \
    GROUP BY Artist HAVING SUM(Sales) > 2000000";

pub const CORPUS: &[(&str, QueryClass, &str)] = &[
    ("Hey Cyrus, could you please show me all of the tracks I've got in my database?", QueryClass::Wildcard, WILDCARD),
    ("What are the songs in the database?", QueryClass::Wildcard, WILDCARD),
    ("List all of my tracks for me.", QueryClass::Wildcard, WILDCARD),
    ("Tracks, please.", QueryClass::Wildcard, WILDCARD),
    ("Show track id and name from the tracks table.", QueryClass::Projection, PROJECTION),
    ("Output the track ids and names in tracks.", QueryClass::Projection, PROJECTION),
    ("List the number and title of the songs.", QueryClass::Projection, PROJECTION),
    ("Track id, name, tracks.", QueryClass::Projection, PROJECTION),
    ("Get tracks composer Jimi Hendrix where the track id is 1479.", QueryClass::Selection, SELECTION),
    ("Print Jimi Hendrix composed songs with the number 1479.", QueryClass::Selection, SELECTION),
    ("Show me the tracks composed by Jimi Hendrix if the track id is 1479.", QueryClass::Selection, SELECTION),
    ("Tracks composer Jimi Hendrix 1479 track id.", QueryClass::Selection, SELECTION),
    (
        "Print track name, media type and genre of Jimi Hendrix composed songs whenever the number is 1479.",
        QueryClass::Selection,
        COMBINED,
    ),
    (
        "List all the artists and their albums distributed by Redeye Distribution in USA that charted top 5 in USA in 2017.",
        QueryClass::Join,
        JOIN,
    ),
    (
        "List top 5 ranked 2017 albums and artists distributed by Redeye Distribution in USA.",
        QueryClass::Join,
        JOIN,
    ),
    (
        "List artists who recorded albums under all the labels artist Gone is Gone has ever recorded.",
        QueryClass::Division,
        DIVISION,
    ),
    (
        "List all the artists who have recorded albums at least with all the labels who recorded Gone is Gone too.",
        QueryClass::Division,
        DIVISION,
    ),
    (
        "Print the artists who sold more than 2 million copies of their albums in USA in 2017.",
        QueryClass::Aggregate,
        AGGREGATE,
    ),
];
