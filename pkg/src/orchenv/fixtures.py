"""Hand-authored worked examples used across tests, demos, and docs.

Two small workflows with fully pinned values: a linear three-step car
rental chain and a four-step city break that fans out into parallel
hotel and attraction branches. Each bundle carries the exact cache
entries its ground truth needs, so replay works offline.
"""

from __future__ import annotations

from dataclasses import dataclass

from .builtin import builtin_template
from .cache import CacheStore, build_cache
from .model import (
    DatasetSample,
    GroundTruth,
    Observation,
    Provenance,
    ToolCall,
)
from .templates import WorkflowTemplate

SEARCH_KEY = "eyJkcml2ZXJzQWdlIjozMH0="


@dataclass(frozen=True)
class ExampleBundle:
    sample: DatasetSample
    entries: tuple[tuple[ToolCall, Observation], ...]
    template: WorkflowTemplate

    def store(self) -> CacheStore:
        return build_cache(self.entries)


def car_rental_example() -> ExampleBundle:
    """Linear chain: locate a landmark, search rentals there, price packages."""
    template = builtin_template("car_rental_packages")

    call_1 = ToolCall("Search_Car_Location", {"query": "San Diego Marriott La Jolla"})
    obs_1 = Observation.success(
        [
            {
                "name": "San Diego Marriott La Jolla",
                "type": "landmark",
                "country": "US",
                "coordinates": {"latitude": 32.87, "longitude": -117.22},
            }
        ]
    )

    call_2 = ToolCall(
        "Search_Car_Rentals",
        {
            "pick_up_latitude": 32.87,
            "pick_up_longitude": -117.22,
            "drop_off_latitude": 32.87,
            "drop_off_longitude": -117.22,
            "pick_up_date": "2024-10-31",
            "drop_off_date": "2024-11-01",
            "pick_up_time": "10:00",
            "drop_off_time": "10:00",
        },
    )
    obs_2 = Observation.success(
        {
            "search_results": [
                {
                    "vehicle_id": "637318066",
                    "vehicle_name": "Toyota Corolla",
                    "group": "economy",
                    "price": {"currency": "USD", "value": 58.4},
                    "supplier_id": "52901",
                }
            ],
            "search_context": {"searchKey": SEARCH_KEY},
            "count": 1,
        }
    )

    call_3 = ToolCall(
        "Get_Packages", {"vehicle_id": "637318066", "search_key": SEARCH_KEY}
    )
    obs_3 = Observation.success(
        {
            "packages": [
                {"package_id": "8112001", "name": "Basic",
                 "price": {"currency": "USD", "value": 12.5}},
                {"package_id": "8112002", "name": "Full Protection",
                 "price": {"currency": "USD", "value": 24.0}},
            ],
            "vehicle_id": "637318066",
            "search_context": {"searchKey": SEARCH_KEY},
        }
    )

    sample = DatasetSample(
        query=(
            "I'm at the San Diego Marriott La Jolla. We're planning to rent a car "
            "for Halloween 2024, departing at 10 AM and returning at the same "
            "place at 10 AM the next day. Check the rental package price?"
        ),
        ground_truth=GroundTruth(
            calls=((1, call_1), (2, call_2), (3, call_3)),
            template_id=template.id,
            expected_observations=(obs_1, obs_2, obs_3),
        ),
        provenance=Provenance(template_id=template.id, seed=0, generator_id="fixture"),
        metadata={"logic": "explicit_conjunction"},
    )
    return ExampleBundle(
        sample=sample,
        entries=((call_1, obs_1), (call_2, obs_2), (call_3, obs_3)),
        template=template,
    )


def city_break_example() -> ExampleBundle:
    """Fan-out: two parallel branches (attractions and hotels) for one city."""
    template = builtin_template("city_break_parallel")

    call_1 = ToolCall("Search_Attraction_Location", {"query": "Montreal"})
    obs_1 = Observation.success(
        {
            "destination": {
                "id": "ChIJDbdkHFQayUwR7-8fITgxTmU",
                "name": "Montreal",
                "country": "CA",
            },
            "products_count": 132,
        }
    )

    call_2 = ToolCall("Search_Hotel_Destination", {"query": "Montreal"})
    obs_2 = Observation.success(
        {
            "destinations": [
                {
                    "dest_id": "-569541",
                    "name": "Montreal",
                    "country": "CA",
                    "coordinates": {"latitude": 45.5, "longitude": -73.57},
                    "hotels_count": 478,
                }
            ]
        }
    )

    call_3 = ToolCall(
        "Search_Attractions",
        {"id": "ChIJDbdkHFQayUwR7-8fITgxTmU", "sortBy": "score"},
    )
    obs_3 = Observation.success(
        {
            "products": [
                {"slug": "pr0419332", "name": "Old Town Walking Tour",
                 "score": 9.4, "price": {"currency": "USD", "value": 35.0}},
                {"slug": "pr0112458", "name": "River Night Experience",
                 "score": 9.1, "price": {"currency": "USD", "value": 54.0}},
            ],
            "count": 2,
            "sorted_by": "score",
        }
    )

    call_4 = ToolCall(
        "Search_Hotels",
        {
            "dest_id": "-569541",
            "arrival_date": "2024-11-20",
            "departure_date": "2024-11-23",
        },
    )
    obs_4 = Observation.success(
        {
            "hotels": [
                {"hotel_id": "7751024", "name": "Harbor Plaza Hotel",
                 "review_score": 9.2,
                 "price_per_night": {"currency": "USD", "value": 182.0}},
                {"hotel_id": "6650313", "name": "Grand Park Hotel",
                 "review_score": 8.9,
                 "price_per_night": {"currency": "USD", "value": 141.5}},
            ],
            "search_context": {"searchKey": "eyJkZXN0IjoiLTU2OTU0MSJ9"},
            "count": 2,
        }
    )

    sample = DatasetSample(
        query=(
            "Recommend two top-rated activities and two highly-reviewed hotels "
            "in Montreal for Nov 20-23."
        ),
        ground_truth=GroundTruth(
            calls=((1, call_1), (1, call_2), (2, call_3), (2, call_4)),
            template_id=template.id,
            expected_observations=(obs_1, obs_2, obs_3, obs_4),
        ),
        provenance=Provenance(template_id=template.id, seed=0, generator_id="fixture"),
        metadata={"logic": "parallel_conjunction"},
    )
    return ExampleBundle(
        sample=sample,
        entries=((call_1, obs_1), (call_2, obs_2), (call_3, obs_3), (call_4, obs_4)),
        template=template,
    )


def city_break_partial_prediction() -> list[ToolCall]:
    """A hotel-branch-only attempt at the city break: the second call keeps
    the right function but drops the required dates, and the attraction
    branch is missing entirely."""
    return [
        ToolCall("Search_Hotel_Destination", {"query": "Montreal"}),
        ToolCall("Search_Hotels", {"dest_id": "-569541"}),
    ]
