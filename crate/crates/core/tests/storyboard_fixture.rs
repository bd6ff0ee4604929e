use planact_core::storyboard::{
    parse_storyboard, shots_to_requests, validate_storyboard, StoryboardError, StoryboardViolationCode, VideoType,
};

const BUTTERFLY: &str = include_str!("fixtures/storyboard_butterfly.json");

#[test]
fn fixture_parses_and_validates_for_twenty_seconds() {
    let sb = parse_storyboard(BUTTERFLY).unwrap();
    assert_eq!(sb.characters.len(), 2);
    assert_eq!(sb.shots.len(), 4);
    assert_eq!(sb.total_duration(), 20);
    assert_eq!(sb.shots[2].video_type, VideoType::Frame2Frame);
    assert!(validate_storyboard(&sb, 20).valid);
    let wrong = validate_storyboard(&sb, 30);
    assert!(wrong.has(&StoryboardViolationCode::DurationMismatch));
}

#[test]
fn fixture_requests_end_with_merge() {
    let sb = parse_storyboard(BUTTERFLY).unwrap();
    let requests = shots_to_requests(&sb).unwrap();
    let tools: Vec<&str> = requests.iter().map(|r| r.tool_name.as_str()).collect();
    assert_eq!(
        tools,
        vec!["image2video_gen", "image2video_gen", "frame2frame_video_gen", "text2video_gen", "merge_video"]
    );
    assert_eq!(requests[4].input_shots, vec![1, 2, 3, 4]);
    assert!(requests[0].prompt.as_deref().unwrap().ends_with("Style: Dreamlike Cartoon Style"));
}

#[test]
fn four_second_shots_are_flagged() {
    let text = BUTTERFLY.replace("\"duration\": 5", "\"duration\": 4");
    let sb = parse_storyboard(&text).unwrap();
    let report = validate_storyboard(&sb, 16);
    assert!(report.has(&StoryboardViolationCode::ShotDuration));
    assert!(matches!(shots_to_requests(&sb), Err(StoryboardError::Invalid(_))));
}

#[test]
fn unknown_key_names_its_path() {
    let text = BUTTERFLY.replace("\"audio_description\": \"Footsteps", "\"mood\": \"calm\", \"audio_description\": \"Footsteps");
    match parse_storyboard(&text) {
        Err(StoryboardError::Schema(e)) => assert_eq!(e.path, "shots[2].mood"),
        other => panic!("expected schema error, got {other:?}"),
    }
}
