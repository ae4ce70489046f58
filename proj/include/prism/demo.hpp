#pragma once

// Bundled demo exhibition. Byte-identical to data/demo/exhibition.json.

#include <string_view>

namespace prism::demo {

inline constexpr std::string_view kExhibitionJson = R"json({
  "id": "forms-of-thought",
  "title": "Forms of Thought - Where the Timeless and the Modern Converge",
  "map": [
    "################",
    "#.......#......#",
    "#F......#.....F#",
    "#.......#......#",
    "#...F...#..F...#",
    "#.......#......#",
    "#F......#.....F#",
    "#.......#......#",
    "#.......#......#",
    "#...F...#..F...#",
    "#F......#.....F#",
    "#.......#......#",
    "#.......#......#",
    "#.......#..F...#",
    "#F......#.....F#",
    "################"
  ],
  "artworks": [
    {
      "id": "a1",
      "title": "Striding Youth",
      "medium": "sculpture",
      "curator_label": "Marble figure in the archaic manner. The left foot steps forward while the arms stay fixed at the sides; movement is promised but never released.",
      "position": { "x": 1.5, "y": 2.5 }
    },
    {
      "id": "a2",
      "title": "Folded-Arm Figure",
      "medium": "sculpture",
      "curator_label": "Island marble idol reduced to planes and a single ridge of a nose. Traces of pigment suggest the surface was once painted.",
      "position": { "x": 1.5, "y": 6.5 }
    },
    {
      "id": "a3",
      "title": "Head of a Contemplative",
      "medium": "sculpture",
      "curator_label": "Sandstone head with lowered eyelids and an elongated earlobe. The calm of the face is carried by the smallest curve at the mouth.",
      "position": { "x": 1.5, "y": 10.5 }
    },
    {
      "id": "a4",
      "title": "Flight Study in Polished Bronze",
      "medium": "sculpture",
      "curator_label": "A single tapering form that removes the bird and keeps the motion. Walk around it and watch the reflection slide along its length.",
      "position": { "x": 4.5, "y": 4.5 }
    },
    {
      "id": "a5",
      "title": "Reclining Landscape",
      "medium": "sculpture",
      "curator_label": "Elmwood figure opened by hollows so that the body reads as hills and caves. Compare its pose with the river gods in the other room.",
      "position": { "x": 4.5, "y": 9.5 }
    },
    {
      "id": "a6",
      "title": "Horse and Rider Fragment",
      "medium": "sculpture",
      "curator_label": "Cast bronze with the rider lost. The horse's raised foreleg and turned head were cast separately and joined.",
      "position": { "x": 14.5, "y": 2.5 }
    },
    {
      "id": "a7",
      "title": "Moon Mask",
      "medium": "sculpture",
      "curator_label": "Carved wood face with a flat disc brow. It was made to be worn, so the eye holes sit higher than you expect.",
      "position": { "x": 14.5, "y": 6.5 }
    },
    {
      "id": "a8",
      "title": "Continuity in Motion",
      "medium": "sculpture",
      "curator_label": "Bronze walker whose muscles stream backward like flames. It asks how a static object can describe speed.",
      "position": { "x": 14.5, "y": 10.5 }
    },
    {
      "id": "a9",
      "title": "The Seated Thinker, Reduced",
      "medium": "sculpture",
      "curator_label": "Tabletop cast of a famous seated figure. The chin rests on the back of the hand, not the palm.",
      "position": { "x": 11.5, "y": 4.5 }
    },
    {
      "id": "a10",
      "title": "Endless Column Segment",
      "medium": "sculpture",
      "curator_label": "Stacked rhomboid modules in oak. The repetition implies a column that could continue past the ceiling.",
      "position": { "x": 11.5, "y": 9.5 }
    },
    {
      "id": "a11",
      "title": "Limestone Fold",
      "medium": "sculpture",
      "curator_label": "A contemporary block cut so that stone appears to bend like cloth, answering the draped figures of antiquity.",
      "position": { "x": 11.5, "y": 13.5 }
    }
  ],
  "entrance": { "x": 3.5, "y": 14.5 },
  "guestbook": { "x": 1.5, "y": 14.5 },
  "laptop": { "x": 14.5, "y": 14.5 },
  "guide_spawn": { "x": 5.5, "y": 13.5 }
}
)json";

}  // namespace prism::demo
