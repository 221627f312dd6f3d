use tafi_core::bench::{synth_split, SynthConfig};
use tafi_core::interp::{estimate_motion, InterpParams};
use tafi_core::texclass::{classify, extract_features, ClassifierThresholds};
use tafi_core::texgen::{synth_clip, SynthSpec};
use tafi_core::TextureClass;

#[test]
fn generated_clips_match_their_settings() {
    for class in TextureClass::ALL {
        let spec = SynthSpec {
            width: 48,
            height: 32,
            n_frames: 5,
            ..SynthSpec::new(class, 11)
        };
        let clip = synth_clip(&spec).unwrap();
        assert_eq!(clip.len(), 5);
        assert_eq!(clip.label(), Some(class));
        for f in clip.frames() {
            assert_eq!((f.width(), f.height()), (48, 32));
            assert_eq!((f.chroma_u().width(), f.chroma_u().height()), (24, 16));
        }
        assert_eq!(synth_clip(&spec).unwrap().frames(), clip.frames());
        let other = synth_clip(&SynthSpec {
            seed: 12,
            ..spec.clone()
        })
        .unwrap();
        assert_ne!(other.frames(), clip.frames());
    }
}

#[test]
fn splits_are_disjoint_and_labelled() {
    let config = SynthConfig {
        train_per_class: 2,
        test_per_class: 1,
        width: 32,
        height: 32,
        frames: 3,
        ..SynthConfig::default()
    };
    let (train, test) = synth_split(&config).unwrap();
    assert_eq!((train.len(), test.len()), (6, 3));
    for c in &train {
        assert!(c.name().starts_with("train_"));
        assert!(test.iter().all(|t| t.frames() != c.frames()));
    }
    assert!(test
        .iter()
        .all(|c| c.name().starts_with("test_") && c.label().is_some()));
}

#[test]
fn motion_statistics_follow_the_class() {
    let mean_motion = |class| {
        let clip = synth_clip(&SynthSpec {
            width: 96,
            height: 96,
            n_frames: 4,
            ..SynthSpec::new(class, 5)
        })
        .unwrap();
        estimate_motion(clip.frame(1), clip.frame(2), &InterpParams::default())
            .unwrap()
            .mean_magnitude()
    };
    let frozen = synth_clip(&SynthSpec {
        motion_amplitude: 0.0,
        width: 64,
        height: 64,
        n_frames: 3,
        ..SynthSpec::new(TextureClass::Static, 1)
    })
    .unwrap();
    assert_eq!(frozen.frame(0), frozen.frame(2));
    assert!(mean_motion(TextureClass::Static) > 0.5);
    assert!(mean_motion(TextureClass::Dyncon) > 0.5);
}

#[test]
fn classifier_agrees_with_labels_on_default_corpus() {
    let (_, test) = synth_split(&SynthConfig::default()).unwrap();
    let th = ClassifierThresholds::default();
    let mut confusion = [[0usize; 3]; 3];
    for clip in &test {
        let f = extract_features(clip, &InterpParams::default()).unwrap();
        confusion[clip.label().unwrap().index()][classify(&f, &th).index()] += 1;
    }
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    assert!(correct * 10 >= test.len() * 9, "confusion {confusion:?}");
}
