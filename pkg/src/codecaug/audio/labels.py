"""Scene class and category vocabulary (DCASE-style 10-class / 3-category)."""

CLASS_LIST = [
    "airport",
    "shopping_mall",
    "metro_station",
    "street_pedestrian",
    "public_square",
    "street_traffic",
    "tram",
    "bus",
    "metro",
    "park",
]

CATEGORY_LIST = ["indoor", "outdoor", "transportation"]

# The class/category split follows DCASE convention; it is configurable on
# DatasetManifest for users with a different grouping.
DEFAULT_CATEGORY_MAP = {
    "airport": "indoor",
    "shopping_mall": "indoor",
    "metro_station": "indoor",
    "street_pedestrian": "outdoor",
    "public_square": "outdoor",
    "street_traffic": "outdoor",
    "park": "outdoor",
    "tram": "transportation",
    "bus": "transportation",
    "metro": "transportation",
}
