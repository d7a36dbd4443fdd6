"""Spatially aligned 360-degree video synthesis from SELD annotations.

The heavy lifting lives in the compiled extension; this package re-exports
its public surface.
"""

from ._core import (  # noqa: F401
    NUM_CLASSES,
    AssetLibrary,
    DoA,
    EventAnnotation,
    EventTrack,
    RenderPlan,
    SceneMetadata,
    SeldSynthError,
    TrackSample,
    __version__,
    angular_distance,
    build_tracks,
    class_id_from_name,
    class_names,
    doa_to_pixel,
    generate,
    interpolate_track,
    load_library,
    parse_metadata,
    parse_metadata_file,
    pixel_to_doa,
    plan_render,
    recover_markers,
    render_clip_png,
    render_frame,
    score,
    score_files,
    validate_polyphony,
    wrap_x,
    write_metadata,
)
