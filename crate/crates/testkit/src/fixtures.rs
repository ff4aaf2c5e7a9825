//! The procedural demo corpus: images, waveforms, text tables, and the
//! toy model registry. Every rule here is documented in the README and
//! frozen by oracle tests; change nothing without updating both.

use std::path::Path;

pub const COLORS: [&str; 10] = [
    "red", "blue", "green", "black", "white", "amber", "coral", "ivory", "olive", "teal",
];
pub const GARMENTS: [&str; 10] = [
    "shirt", "hat", "scarf", "jacket", "dress", "coat", "sweater", "blazer", "skirt", "vest",
];
pub const GENRES: [&str; 5] = ["ambient", "jazz", "rock", "folk", "techno"];

/// toy_text vocabulary, ids by position.
pub const TEXT_VOCAB: [&str; 31] = [
    "<unk>", "style", "red", "blue", "green", "black", "white", "amber", "coral", "ivory",
    "olive", "teal", "shirt", "hat", "scarf", "jacket", "dress", "coat", "sweater", "blazer",
    "skirt", "vest", "limited", "edition", "ambient", "jazz", "rock", "folk", "techno",
    "classic", "cut",
];

/// toy_reviews vocabulary, ids by position.
pub const REVIEW_VOCAB: [&str; 21] = [
    "<unk>", "great", "quality", "loved", "it", "poor", "fit", "awful", "nice", "color", "fast",
    "shipping", "would", "buy", "again", "not", "worth", "the", "price", "perfect", "gift",
];

/// Demo image k: 4x4 P6, pixel (y, x, c) = (24k + 16y + 4x + c) mod 256.
pub fn demo_image(k: usize) -> Vec<u8> {
    let mut bytes = b"P6\n4 4\n255\n".to_vec();
    for y in 0..4 {
        for x in 0..4 {
            for c in 0..3 {
                bytes.push(((24 * k + 16 * y + 4 * x + c) % 256) as u8);
            }
        }
    }
    bytes
}

/// Demo waveform k: 64 sawtooth samples with period P = 8(k + 1),
/// s[t] = ((t mod P) * 24000) / P - 12000 in integer arithmetic.
pub fn demo_samples(k: usize) -> Vec<i16> {
    let p = 8 * (k + 1);
    (0..64)
        .map(|t| (((t % p) * 24000 / p) as i32 - 12000) as i16)
        .collect()
}

/// Wraps PCM16 mono samples in a minimal RIFF/WAVE container.
pub fn wav_pcm16(rate: u32, samples: &[i16]) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&rate.to_le_bytes());
    out.extend_from_slice(&(rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

/// W[i][j] = (((i * cols + j) mod m) - sub) / div, the corpus rule for
/// every weight matrix and embedding table.
pub fn mod_matrix(rows: usize, cols: usize, m: usize, sub: f64, div: f64) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| (((i * cols + j) % m) as f64 - sub) / div)
                .collect()
        })
        .collect()
}

fn vocab_value(words: &[&str]) -> serde_json::Value {
    serde_json::Value::Object(
        words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.to_string(), serde_json::json!(i)))
            .collect(),
    )
}

/// The full toy registry used by the demos and the acceptance suite.
pub fn registry_json() -> String {
    let registry = serde_json::json!({
        "models": {
            "toy_visual": {
                "modality": "visual",
                "input": {
                    "shape": [4, 4, 3],
                    "mean": [0.5, 0.5, 0.5],
                    "std": [0.5, 0.5, 0.5]
                },
                "variants": {"default": {"layers": [
                    {"name": "flatten", "kind": "flatten"},
                    {
                        "name": "fc1",
                        "kind": "linear",
                        "weights": mod_matrix(4, 27, 7, 3.0, 10.0),
                        "bias": [0.0, 0.01, 0.02, 0.03]
                    },
                    {"name": "relu1", "kind": "relu"}
                ]}}
            },
            "toy_text": {
                "modality": "textual",
                "input": {"vocab": vocab_value(&TEXT_VOCAB)},
                "variants": {"default": {"layers": [
                    {
                        "name": "embed",
                        "kind": "embedding",
                        "table": mod_matrix(31, 6, 11, 5.0, 8.0)
                    },
                    {"name": "pool", "kind": "mean_pool"},
                    {"name": "norm", "kind": "l2_normalize"}
                ]}}
            },
            "toy_audio": {
                "modality": "audio",
                "input": {"sample_rate": 8000},
                "variants": {"default": {"layers": [
                    {"name": "frames", "kind": "frame_rms", "frame": 16, "hop": 16},
                    {
                        "name": "fc",
                        "kind": "linear",
                        "weights": mod_matrix(3, 4, 5, 2.0, 4.0),
                        "bias": [0.0, 0.05, 0.1]
                    }
                ]}}
            },
            "toy_reviews": {
                "modality": "textual",
                "input": {"vocab": vocab_value(&REVIEW_VOCAB)},
                "variants": {
                    "default": {"layers": [
                        {
                            "name": "embed",
                            "kind": "embedding",
                            "table": mod_matrix(21, 4, 9, 4.0, 6.0)
                        },
                        {"name": "pool", "kind": "mean_pool"},
                        {"name": "out", "kind": "l2_normalize"}
                    ]},
                    "sentiment": {"layers": [
                        {
                            "name": "embed",
                            "kind": "embedding",
                            "table": mod_matrix(21, 4, 9, 4.0, 6.0)
                        },
                        {"name": "pool", "kind": "mean_pool"},
                        {
                            "name": "senti",
                            "kind": "linear",
                            "weights": mod_matrix(2, 4, 3, 1.0, 2.0),
                            "bias": [0.1, -0.1]
                        },
                        {"name": "out", "kind": "tanh"}
                    ]}
                }
            }
        }
    });
    serde_json::to_string_pretty(&registry).expect("registry serializes")
}

/// Demo 1 text table: header + 10 item descriptions.
pub fn demo1_descriptions_tsv() -> String {
    let mut out = String::from("item\tdescription\n");
    for k in 0..10 {
        out.push_str(&format!(
            "item{k}\tStyle #{k}: {} {}, limited edition!\n",
            COLORS[k], GARMENTS[k]
        ));
    }
    out
}

/// Demo 2 text table: positional (id, text), no header.
pub fn demo2_genres_tsv() -> String {
    (0..5)
        .map(|k| format!("track{k}\t{}\n", GENRES[k]))
        .collect()
}

/// Demo 3 items table: positional (id, text), no header.
pub fn demo3_products_tsv() -> String {
    (0..8)
        .map(|k| format!("p{k}\t{} {} classic cut\n", COLORS[k], GARMENTS[k]))
        .collect()
}

/// Demo 3 interactions table: header user/item/review, 12 rows.
pub fn demo3_reviews_tsv() -> String {
    let rows: [(&str, &str, &str); 12] = [
        ("u0", "p0", "Great quality, loved it!"),
        ("u0", "p1", "Poor fit. Not worth the price."),
        ("u0", "p2", "Great fit, would buy again."),
        ("u1", "p0", "Nice color, fast shipping."),
        ("u1", "p2", "Would buy again!"),
        ("u1", "p5", "Poor quality, awful color."),
        ("u2", "p3", "Awful quality."),
        ("u2", "p4", "Perfect gift, loved it."),
        ("u2", "p5", "Nice fit, great price!"),
        ("u3", "p1", "Not worth it."),
        ("u3", "p6", "Fast shipping, nice quality."),
        ("u3", "p7", "Loved the color!"),
    ];
    let mut out = String::from("user\titem\treview\n");
    for (user, item, review) in rows {
        out.push_str(&format!("{user}\t{item}\t{review}\n"));
    }
    out
}

/// Demo 1 config: visual + textual items.
pub fn demo1_yaml(dataset: &str) -> String {
    format!(
        "dataset_path: {dataset}\n\
         gpu_list: -1\n\
         visual:\n\
         \x20 items:\n\
         \x20   input_folder: images\n\
         \x20   output_folder: out/visual\n\
         \x20   model:\n\
         \x20     - name: toy_visual\n\
         \x20       backend: toy\n\
         \x20       output_layers: [relu1]\n\
         \x20       reshape: [3, 3]\n\
         textual:\n\
         \x20 items:\n\
         \x20   input_folder: descriptions.tsv\n\
         \x20   output_folder: out/textual\n\
         \x20   item_column: item\n\
         \x20   text_column: description\n\
         \x20   model:\n\
         \x20     - name: toy_text\n\
         \x20       backend: toy\n\
         \x20       output_layers: [norm]\n\
         \x20       clear_text: true\n"
    )
}

/// Demo 2 config: audio + textual items.
pub fn demo2_yaml(dataset: &str) -> String {
    format!(
        "dataset_path: {dataset}\n\
         gpu_list: -1\n\
         audio:\n\
         \x20 items:\n\
         \x20   input_folder: tracks\n\
         \x20   output_folder: out/audio\n\
         \x20   model:\n\
         \x20     - name: toy_audio\n\
         \x20       backend: toy\n\
         \x20       output_layers: [fc]\n\
         textual:\n\
         \x20 items:\n\
         \x20   input_folder: genres.tsv\n\
         \x20   output_folder: out/genres\n\
         \x20   model:\n\
         \x20     - name: toy_text\n\
         \x20       backend: toy\n\
         \x20       output_layers: [norm]\n\
         \x20       clear_text: true\n"
    )
}

/// Demo 3 config: textual items + interactions. `task: None` omits the
/// task line so the default variant is selected.
pub fn demo3_yaml(dataset: &str, task: Option<&str>) -> String {
    let task_line = match task {
        Some(t) => format!("\x20       task: {t}\n"),
        None => String::new(),
    };
    format!(
        "dataset_path: {dataset}\n\
         gpu_list: -1\n\
         textual:\n\
         \x20 items:\n\
         \x20   input_folder: products.tsv\n\
         \x20   output_folder: out/products\n\
         \x20   model:\n\
         \x20     - name: toy_text\n\
         \x20       backend: toy\n\
         \x20       output_layers: [norm]\n\
         \x20       clear_text: true\n\
         \x20 interactions:\n\
         \x20   input_folder: reviews.tsv\n\
         \x20   output_folder: out/reviews\n\
         \x20   user_column: user\n\
         \x20   item_column: item\n\
         \x20   text_column: review\n\
         \x20   model:\n\
         \x20     - name: toy_reviews\n\
         \x20       backend: toy\n\
         \x20       output_layers: [out]\n\
         \x20       clear_text: true\n{task_line}"
    )
}

/// Writes the whole corpus (media, tables, registry) under `root`.
pub fn write_demo_data(root: &Path) -> std::io::Result<()> {
    let images = root.join("images");
    std::fs::create_dir_all(&images)?;
    for k in 0..10 {
        std::fs::write(images.join(format!("item{k}.ppm")), demo_image(k))?;
    }
    let tracks = root.join("tracks");
    std::fs::create_dir_all(&tracks)?;
    for k in 0..5 {
        std::fs::write(
            tracks.join(format!("track{k}.wav")),
            wav_pcm16(8000, &demo_samples(k)),
        )?;
    }
    std::fs::write(root.join("descriptions.tsv"), demo1_descriptions_tsv())?;
    std::fs::write(root.join("genres.tsv"), demo2_genres_tsv())?;
    std::fs::write(root.join("products.tsv"), demo3_products_tsv())?;
    std::fs::write(root.join("reviews.tsv"), demo3_reviews_tsv())?;
    std::fs::write(root.join("registry.json"), registry_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_image_is_4x4_p6() {
        let bytes = demo_image(0);
        assert!(bytes.starts_with(b"P6\n4 4\n255\n"));
        assert_eq!(bytes.len(), 11 + 48);
        // (y=0, x=0): 0 1 2; (y=0, x=1): 4 5 6
        assert_eq!(&bytes[11..17], &[0, 1, 2, 4, 5, 6]);
        // image 1 shifts by 24
        assert_eq!(demo_image(1)[11], 24);
    }

    #[test]
    fn demo_samples_are_periodic_sawtooth() {
        let s = demo_samples(0); // period 8
        assert_eq!(s.len(), 64);
        assert_eq!(s[0], -12000);
        assert_eq!(s[1], -9000); // 24000/8 = 3000 per step
        assert_eq!(s[7], 9000);
        assert_eq!(s[8], -12000);
    }

    #[test]
    fn wav_container_is_44_byte_header_plus_data() {
        let bytes = wav_pcm16(8000, &[0, 1, -1]);
        assert_eq!(bytes.len(), 50);
        assert_eq!(&bytes[0..4], b"RIFF");
        assert_eq!(&bytes[8..12], b"WAVE");
        assert_eq!(&bytes[44..46], &[0, 0]);
    }

    #[test]
    fn registry_is_valid_json_with_four_models() {
        let value: serde_json::Value = serde_json::from_str(&registry_json()).unwrap();
        let models = value["models"].as_object().unwrap();
        assert_eq!(models.len(), 4);
        assert_eq!(
            models["toy_visual"]["variants"]["default"]["layers"][1]["weights"][0][0],
            serde_json::json!(-0.3)
        );
        assert_eq!(models["toy_text"]["input"]["vocab"]["<unk>"], 0);
        assert_eq!(models["toy_text"]["input"]["vocab"]["cut"], 30);
    }

    #[test]
    fn tables_have_documented_shapes() {
        assert_eq!(demo1_descriptions_tsv().lines().count(), 11);
        assert_eq!(demo2_genres_tsv().lines().count(), 5);
        assert_eq!(demo3_products_tsv().lines().count(), 8);
        assert_eq!(demo3_reviews_tsv().lines().count(), 13);
        assert!(demo1_descriptions_tsv().starts_with("item\tdescription\n"));
        assert!(demo1_descriptions_tsv().contains("item0\tStyle #0: red shirt, limited edition!"));
    }

    #[test]
    fn write_demo_data_lays_out_the_corpus() {
        let dir = tempfile::tempdir().unwrap();
        write_demo_data(dir.path()).unwrap();
        assert!(dir.path().join("images/item9.ppm").exists());
        assert!(dir.path().join("tracks/track4.wav").exists());
        assert!(dir.path().join("registry.json").exists());
        assert!(dir.path().join("reviews.tsv").exists());
    }
}
