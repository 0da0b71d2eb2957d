"""Deterministic synthetic upstream standing in for live travel APIs.

Covers 40 functions across five domains (hotels, car rentals, flights,
attractions, taxis). Responses are a pure function of (call, seed): the
per-call rng is derived from the call's canonical key, so the same call
always yields a byte-identical observation no matter which chain or
process produced it.

The shapes and parameter distributions here are this artifact's own
invention; they mimic travel-booking APIs closely enough to exercise
dependency propagation (ids, context keys, coordinates) but carry no
real data.
"""

from __future__ import annotations

import base64
import random
from typing import Callable, Mapping

from .canon import canonical_key, derive_seed
from .cache import CacheStore, expand_workflow
from .errors import UpstreamError
from .model import (
    Constraint,
    ConstraintKind,
    FunctionSchema,
    Observation,
    ParamSpec,
    ParamType,
    ToolCall,
    Value,
)
from .templates import WorkflowTemplate

CITIES = (
    "San Diego", "Montreal", "Tokyo", "Osaka", "Paris", "London", "Rome",
    "Berlin", "Madrid", "Lisbon", "Amsterdam", "Vienna", "Prague", "Dublin",
    "Toronto", "Vancouver", "Seattle", "Austin", "Boston", "Chicago",
    "Sydney", "Auckland", "Singapore", "Seoul",
)
LANDMARKS = (
    "San Diego Marriott La Jolla", "Gare du Nord", "Shinjuku Station",
    "Old Port of Montreal", "Tower Bridge", "Brandenburg Gate",
    "Pike Place Market", "Circular Quay",
)
HOTEL_BRANDS = ("Grand", "Central", "Park", "Harbor", "Royal", "Plaza", "Garden")
CAR_MAKES = ("Toyota Corolla", "Ford Focus", "VW Golf", "Kia Rio", "Honda Civic",
             "Fiat 500", "Nissan Qashqai", "Renault Clio")
CAR_GROUPS = ("economy", "compact", "intermediate", "suv", "minivan")
CURRENCY = "USD"
AIRPORT_CODES = ("JFK", "CDG", "LHR", "NRT", "YUL", "SAN", "SYD", "SIN",
                 "FRA", "MAD", "FCO", "AMS", "SEA", "ORD", "BOS", "ICN")
AIRLINES = ("AA", "AF", "BA", "JL", "AC", "DL", "QF", "SQ")
SORT_OPTIONS = ("score", "price", "distance")
TICKET_CATEGORIES = ("adult", "child", "senior")
TAXI_CATEGORIES = ("standard", "executive", "minivan", "electric")
PACKAGE_NAMES = ("Basic", "Standard", "Full Protection")
ROOM_NAMES = ("Standard Double", "Twin Room", "Queen Suite", "Family Room")


def _digits(rng: random.Random, n: int) -> str:
    return "".join(str(rng.randrange(10)) for _ in range(n))


def _b64key(rng: random.Random, nbytes: int = 18) -> str:
    return base64.b64encode(bytes(rng.getrandbits(8) for _ in range(nbytes))).decode()


def _place_id(rng: random.Random) -> str:
    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_"
    return "ChIJ" + "".join(rng.choice(alphabet) for _ in range(23))


def _latitude(rng: random.Random) -> float:
    return round(rng.uniform(-85.0, 85.0), 2)


def _longitude(rng: random.Random) -> float:
    return round(rng.uniform(-179.0, 179.0), 2)


def _date(rng: random.Random, day_offset: int = 0) -> str:
    # All synthetic dates live in 2024; keeps every sampled value a real date.
    month = rng.randrange(1, 13)
    day = rng.randrange(1, 29 - day_offset) + day_offset
    return f"2024-{month:02d}-{day:02d}"


def _date_pair(rng: random.Random) -> tuple[str, str]:
    month = rng.randrange(1, 13)
    start = rng.randrange(1, 26)
    nights = rng.randrange(1, 28 - start + 1) if start < 27 else 1
    return f"2024-{month:02d}-{start:02d}", f"2024-{month:02d}-{start + nights:02d}"


def _time(rng: random.Random) -> str:
    return f"{rng.randrange(24):02d}:{rng.choice((0, 15, 30, 45)):02d}"


def _price(rng: random.Random, low: float, high: float) -> dict:
    return {"currency": CURRENCY, "value": round(rng.uniform(low, high), 2)}


def _score(rng: random.Random) -> float:
    return round(rng.uniform(5.0, 9.9), 1)


# --- schema construction ------------------------------------------------------

_S = ParamType.STRING
_I = ParamType.INTEGER
_F = ParamType.FLOAT


def _p(
    ptype: ParamType,
    required: bool = True,
    constraint: ConstraintKind | None = None,
    values: tuple[str, ...] = (),
) -> ParamSpec:
    c = Constraint(constraint, values) if constraint is not None else None
    return ParamSpec(type=ptype, required=required, constraint=c)


_QUERY = _p(_S, constraint=ConstraintKind.NON_EMPTY)
_DATE = _p(_S, constraint=ConstraintKind.DATE)
_TIME = _p(_S, constraint=ConstraintKind.TIME)
_LAT = _p(_F, constraint=ConstraintKind.LATITUDE)
_LON = _p(_F, constraint=ConstraintKind.LONGITUDE)
_ID = _p(_S, constraint=ConstraintKind.NON_EMPTY)
_ADULTS = _p(_I, required=False)
_AIRPORT = _p(_S, constraint=ConstraintKind.ENUM, values=AIRPORT_CODES)


def _schemas() -> list[FunctionSchema]:
    return [
        # hotels
        FunctionSchema("Search_Hotel_Destination", {"query": _QUERY},
                       response_fields=("destinations",)),
        FunctionSchema("Search_Hotels",
                       {"dest_id": _ID, "arrival_date": _DATE, "departure_date": _DATE,
                        "adults": _ADULTS},
                       response_fields=("hotels", "search_context")),
        FunctionSchema("Search_Hotels_By_Coordinates",
                       {"latitude": _LAT, "longitude": _LON,
                        "arrival_date": _DATE, "departure_date": _DATE},
                       response_fields=("hotels", "search_context")),
        FunctionSchema("Get_Hotel_Details",
                       {"hotel_id": _ID, "arrival_date": _DATE, "departure_date": _DATE},
                       response_fields=("hotel",)),
        FunctionSchema("Get_Room_Availability",
                       {"hotel_id": _ID, "arrival_date": _DATE, "departure_date": _DATE},
                       response_fields=("rooms",)),
        FunctionSchema("Get_Hotel_Reviews", {"hotel_id": _ID},
                       response_fields=("reviews", "average_score")),
        FunctionSchema("Get_Hotel_Photos", {"hotel_id": _ID},
                       response_fields=("photos",)),
        FunctionSchema("Get_Hotel_Policies", {"hotel_id": _ID},
                       response_fields=("policies",)),
        # car rentals
        FunctionSchema("Search_Car_Location", {"query": _QUERY}),
        FunctionSchema("Search_Car_Rentals",
                       {"pick_up_latitude": _LAT, "pick_up_longitude": _LON,
                        "drop_off_latitude": _LAT, "drop_off_longitude": _LON,
                        "pick_up_date": _DATE, "drop_off_date": _DATE,
                        "pick_up_time": _TIME, "drop_off_time": _TIME},
                       response_fields=("search_results", "search_context")),
        FunctionSchema("Search_Car_Rentals_Airport",
                       {"airport_code": _AIRPORT, "pick_up_date": _DATE,
                        "drop_off_date": _DATE},
                       response_fields=("search_results", "search_context")),
        FunctionSchema("Get_Packages", {"vehicle_id": _ID, "search_key": _ID},
                       response_fields=("packages",)),
        FunctionSchema("Vehicle_Supplier_Ratings", {"vehicle_id": _ID, "search_key": _ID},
                       response_fields=("ratings",)),
        FunctionSchema("Get_Car_Insurance", {"vehicle_id": _ID, "search_key": _ID},
                       response_fields=("options",)),
        FunctionSchema("Get_Vehicle_Details", {"vehicle_id": _ID, "search_key": _ID},
                       response_fields=("vehicle", "search_context")),
        FunctionSchema("Get_Supplier_Policies", {"supplier_id": _ID},
                       response_fields=("policies",)),
        # flights
        FunctionSchema("Search_Flight_Location", {"query": _QUERY},
                       response_fields=("airports",)),
        FunctionSchema("Search_Flights",
                       {"from_code": _AIRPORT, "to_code": _AIRPORT,
                        "departure_date": _DATE, "adults": _ADULTS},
                       response_fields=("flights", "search_token")),
        FunctionSchema("Search_Flights_Return",
                       {"from_code": _AIRPORT, "to_code": _AIRPORT,
                        "departure_date": _DATE, "return_date": _DATE},
                       response_fields=("flights", "search_token")),
        FunctionSchema("Get_Flight_Details", {"flight_id": _ID, "search_token": _ID},
                       response_fields=("flight",)),
        FunctionSchema("Get_Seat_Map", {"flight_id": _ID, "search_token": _ID},
                       response_fields=("cabins",)),
        FunctionSchema("Get_Baggage_Policy", {"flight_id": _ID, "search_token": _ID},
                       response_fields=("baggage",)),
        FunctionSchema("Get_Fare_Calendar", {"from_code": _AIRPORT, "to_code": _AIRPORT},
                       response_fields=("days",)),
        FunctionSchema("Get_Airline_Details",
                       {"airline_code": _p(_S, constraint=ConstraintKind.ENUM,
                                           values=AIRLINES)},
                       response_fields=("airline",)),
        # attractions
        FunctionSchema("Search_Attraction_Location", {"query": _QUERY},
                       response_fields=("destination",)),
        FunctionSchema("Search_Attractions",
                       {"id": _ID,
                        "sortBy": _p(_S, required=False, constraint=ConstraintKind.ENUM,
                                     values=SORT_OPTIONS)},
                       response_fields=("products",)),
        FunctionSchema("Search_Attractions_By_Coordinates",
                       {"latitude": _LAT, "longitude": _LON},
                       response_fields=("products",)),
        FunctionSchema("Get_Attraction_Details", {"slug": _ID},
                       response_fields=("product",)),
        FunctionSchema("Get_Availability", {"slug": _ID, "date": _DATE},
                       response_fields=("slots",)),
        FunctionSchema("Get_Availability_Calendar", {"slug": _ID},
                       response_fields=("calendar",)),
        FunctionSchema("Get_Attraction_Reviews", {"slug": _ID},
                       response_fields=("reviews", "average_score")),
        FunctionSchema("Get_Ticket_Options", {"slug": _ID, "date": _DATE},
                       response_fields=("tickets",)),
        # taxis
        FunctionSchema("Taxi_Search_Location", {"query": _QUERY},
                       response_fields=("places",)),
        FunctionSchema("Search_Taxi",
                       {"pick_up_place_id": _ID, "drop_off_place_id": _ID,
                        "pick_up_date": _DATE, "pick_up_time": _TIME},
                       response_fields=("results", "search_id")),
        FunctionSchema("Search_Airport_Taxi",
                       {"airport_code": _AIRPORT, "pick_up_date": _DATE,
                        "pick_up_time": _TIME},
                       response_fields=("results", "search_id")),
        FunctionSchema("Get_Taxi_Details", {"result_id": _ID, "search_id": _ID},
                       response_fields=("result",)),
        FunctionSchema("Book_Taxi_Quote", {"result_id": _ID, "search_id": _ID},
                       response_fields=("quote",)),
        FunctionSchema("Get_Taxi_Cancellation_Policy", {"result_id": _ID, "search_id": _ID},
                       response_fields=("policy",)),
        FunctionSchema("Get_Driver_Ratings", {"result_id": _ID, "search_id": _ID},
                       response_fields=("ratings",)),
        FunctionSchema("Get_Taxi_Fare_Estimate",
                       {"pick_up_place_id": _ID, "drop_off_place_id": _ID},
                       response_fields=("estimate",)),
    ]


def build_mock_registry() -> dict[str, FunctionSchema]:
    return {schema.name: schema for schema in _schemas()}


# --- response builders --------------------------------------------------------


def _hotels_payload(args: Mapping[str, Value], rng: random.Random) -> dict:
    hotels = [
        {
            "hotel_id": _digits(rng, 7),
            "name": f"{rng.choice(HOTEL_BRANDS)} {rng.choice(HOTEL_BRANDS)} Hotel",
            "review_score": _score(rng),
            "price_per_night": _price(rng, 60, 420),
        }
        for _ in range(rng.randrange(3, 7))
    ]
    return {
        "hotels": hotels,
        "search_context": {"searchKey": _b64key(rng)},
        "count": len(hotels),
    }


def _car_results_payload(args: Mapping[str, Value], rng: random.Random) -> dict:
    results = [
        {
            "vehicle_id": _digits(rng, 9),
            "vehicle_name": rng.choice(CAR_MAKES),
            "group": rng.choice(CAR_GROUPS),
            "price": _price(rng, 25, 180),
            "supplier_id": _digits(rng, 5),
        }
        for _ in range(rng.randrange(3, 7))
    ]
    return {
        "search_results": results,
        "search_context": {"searchKey": _b64key(rng)},
        "count": len(results),
    }


def _flights_payload(args: Mapping[str, Value], rng: random.Random) -> dict:
    flights = [
        {
            "flight_id": f"{rng.choice(AIRLINES)}{_digits(rng, 4)}",
            "price": _price(rng, 90, 1400),
            "departure_time": _time(rng),
            "arrival_time": _time(rng),
            "stops": rng.randrange(0, 3),
        }
        for _ in range(rng.randrange(3, 6))
    ]
    return {"flights": flights, "search_token": _b64key(rng), "count": len(flights)}


def _products_payload(args: Mapping[str, Value], rng: random.Random) -> dict:
    products = [
        {
            "slug": f"pr{_digits(rng, 7)}",
            "name": f"{rng.choice(('Walking', 'Food', 'Museum', 'River', 'Night'))} "
                    f"{rng.choice(('Tour', 'Experience', 'Pass'))}",
            "score": _score(rng),
            "price": _price(rng, 10, 160),
        }
        for _ in range(rng.randrange(3, 7))
    ]
    payload: dict = {"products": products, "count": len(products)}
    if "sortBy" in args:
        payload["sorted_by"] = args["sortBy"]
    return payload


def _taxi_results_payload(args: Mapping[str, Value], rng: random.Random) -> dict:
    results = [
        {
            "result_id": _digits(rng, 9),
            "category": rng.choice(TAXI_CATEGORIES),
            "price": _price(rng, 15, 120),
            "duration_minutes": rng.randrange(8, 90),
        }
        for _ in range(rng.randrange(2, 6))
    ]
    return {"results": results, "search_id": _b64key(rng), "count": len(results)}


def _reviews_payload(args: Mapping[str, Value], rng: random.Random) -> dict:
    reviews = [
        {
            "review_id": _digits(rng, 8),
            "score": _score(rng),
            "title": rng.choice(("Great stay", "Would return", "Average", "Loved it")),
        }
        for _ in range(rng.randrange(2, 6))
    ]
    return {"reviews": reviews, "average_score": _score(rng)}


def _builders() -> dict[str, Callable[[Mapping[str, Value], random.Random], Value]]:
    return {
        "Search_Hotel_Destination": lambda a, rng: {
            "destinations": [
                {
                    "dest_id": f"-{_digits(rng, 6)}",
                    "name": a.get("query", ""),
                    "country": rng.choice(("US", "CA", "FR", "JP", "GB", "AU")),
                    "coordinates": {"latitude": _latitude(rng), "longitude": _longitude(rng)},
                    "hotels_count": rng.randrange(40, 900),
                }
            ]
        },
        "Search_Hotels": _hotels_payload,
        "Search_Hotels_By_Coordinates": _hotels_payload,
        "Get_Hotel_Details": lambda a, rng: {
            "hotel": {
                "hotel_id": a.get("hotel_id", ""),
                "name": f"{rng.choice(HOTEL_BRANDS)} House",
                "address": f"{rng.randrange(1, 400)} {rng.choice(HOTEL_BRANDS)} Street",
                "facilities": rng.sample(
                    ("wifi", "parking", "pool", "gym", "spa", "bar"), k=3
                ),
            },
            "search_context": {"searchKey": _b64key(rng)},
        },
        "Get_Room_Availability": lambda a, rng: {
            "rooms": [
                {
                    "room_id": _digits(rng, 8),
                    "name": rng.choice(ROOM_NAMES),
                    "price": _price(rng, 70, 380),
                    "available": rng.randrange(1, 9),
                }
                for _ in range(rng.randrange(2, 5))
            ]
        },
        "Get_Hotel_Reviews": _reviews_payload,
        "Get_Hotel_Photos": lambda a, rng: {
            "photos": [
                {"photo_id": _digits(rng, 8),
                 "url": f"https://static.example/h/{_digits(rng, 10)}.jpg"}
                for _ in range(rng.randrange(3, 8))
            ]
        },
        "Get_Hotel_Policies": lambda a, rng: {
            "policies": {
                "checkin_from": rng.choice(("14:00", "15:00", "16:00")),
                "checkout_until": rng.choice(("10:00", "11:00", "12:00")),
                "children_allowed": rng.random() < 0.8,
            }
        },
        # list-rooted on purpose: location lookups return a ranked place list
        "Search_Car_Location": lambda a, rng: [
            {
                "name": a.get("query", ""),
                "type": rng.choice(("city", "landmark", "airport")),
                "country": rng.choice(("US", "CA", "FR", "JP", "GB", "AU")),
                "coordinates": {"latitude": _latitude(rng), "longitude": _longitude(rng)},
            }
            for _ in range(rng.randrange(1, 3))
        ],
        "Search_Car_Rentals": _car_results_payload,
        "Search_Car_Rentals_Airport": _car_results_payload,
        "Get_Packages": lambda a, rng: {
            "packages": [
                {"package_id": _digits(rng, 7), "name": name,
                 "price": _price(rng, 8, 60)}
                for name in PACKAGE_NAMES[: rng.randrange(2, 4)]
            ],
            "vehicle_id": a.get("vehicle_id", ""),
            "search_context": {"searchKey": a.get("search_key", "")},
        },
        "Vehicle_Supplier_Ratings": lambda a, rng: {
            "ratings": {
                "average": _score(rng),
                "count": rng.randrange(20, 4000),
                "breakdown": {
                    "cleanliness": _score(rng),
                    "pickup_time": _score(rng),
                    "value": _score(rng),
                },
            },
            "supplier_id": _digits(rng, 5),
        },
        "Get_Car_Insurance": lambda a, rng: {
            "options": [
                {"insurance_id": _digits(rng, 7),
                 "name": rng.choice(("Damage Waiver", "Full Cover", "Theft Cover")),
                 "daily_price": _price(rng, 4, 30)}
                for _ in range(rng.randrange(1, 4))
            ]
        },
        "Get_Vehicle_Details": lambda a, rng: {
            "vehicle": {
                "vehicle_id": a.get("vehicle_id", ""),
                "seats": rng.randrange(2, 9),
                "transmission": rng.choice(("manual", "automatic")),
                "fuel_policy": rng.choice(("full_to_full", "prepaid")),
            },
            "search_context": {"searchKey": a.get("search_key", "")},
        },
        "Get_Supplier_Policies": lambda a, rng: {
            "policies": {
                "supplier_id": a.get("supplier_id", ""),
                "deposit_required": rng.random() < 0.7,
                "min_driver_age": rng.choice((18, 21, 23, 25)),
            }
        },
        "Search_Flight_Location": lambda a, rng: {
            "airports": [
                {"code": rng.choice(AIRPORT_CODES),
                 "name": f"{a.get('query', '')} International",
                 "city": a.get("query", "")}
                for _ in range(rng.randrange(1, 3))
            ]
        },
        "Search_Flights": _flights_payload,
        "Search_Flights_Return": _flights_payload,
        "Get_Flight_Details": lambda a, rng: {
            "flight": {
                "flight_id": a.get("flight_id", ""),
                "aircraft": rng.choice(("A320", "B737", "A350", "B787")),
                "cabin_class": rng.choice(("economy", "premium", "business")),
            },
            "search_token": a.get("search_token", ""),
        },
        "Get_Seat_Map": lambda a, rng: {
            "cabins": [
                {"cabin": "economy", "rows": rng.randrange(18, 40),
                 "available_seats": [f"{rng.randrange(1, 40)}{rng.choice('ABCDEF')}"
                                     for _ in range(rng.randrange(2, 7))]}
            ]
        },
        "Get_Baggage_Policy": lambda a, rng: {
            "baggage": {
                "cabin_kg": rng.choice((7, 8, 10)),
                "checked_kg": rng.choice((20, 23, 30)),
                "extra_bag_fee": _price(rng, 25, 90),
            }
        },
        "Get_Fare_Calendar": lambda a, rng: {
            "days": [
                {"date": _date(rng), "price": _price(rng, 80, 900)}
                for _ in range(7)
            ]
        },
        "Get_Airline_Details": lambda a, rng: {
            "airline": {
                "code": a.get("airline_code", ""),
                "name": f"{rng.choice(('Pacific', 'Atlantic', 'Union', 'Polar'))} Air",
                "alliance": rng.choice(("oneworld", "star", "skyteam", "none")),
            }
        },
        "Search_Attraction_Location": lambda a, rng: {
            "destination": {
                "id": _place_id(rng),
                "name": a.get("query", ""),
                "country": rng.choice(("US", "CA", "FR", "JP", "GB", "AU")),
            },
            "products_count": rng.randrange(10, 400),
        },
        "Search_Attractions": _products_payload,
        "Search_Attractions_By_Coordinates": _products_payload,
        "Get_Attraction_Details": lambda a, rng: {
            "product": {
                "slug": a.get("slug", ""),
                "name": f"{rng.choice(('City', 'Harbor', 'Castle'))} Tour",
                "description": "A guided visit with skip-the-line entry.",
                "duration_hours": rng.choice((1, 2, 3, 4)),
            }
        },
        "Get_Availability": lambda a, rng: {
            "slots": [
                {"start_time": _time(rng), "capacity": rng.randrange(2, 30),
                 "price": _price(rng, 12, 90)}
                for _ in range(rng.randrange(2, 6))
            ],
            "date": a.get("date", ""),
        },
        "Get_Availability_Calendar": lambda a, rng: {
            "calendar": [
                {"date": _date(rng), "available": rng.random() < 0.8}
                for _ in range(14)
            ]
        },
        "Get_Attraction_Reviews": _reviews_payload,
        "Get_Ticket_Options": lambda a, rng: {
            "tickets": [
                {"ticket_id": _digits(rng, 8), "category": cat,
                 "price": _price(rng, 8, 70)}
                for cat in TICKET_CATEGORIES[: rng.randrange(1, 4)]
            ]
        },
        "Taxi_Search_Location": lambda a, rng: {
            "places": [
                {"place_id": _place_id(rng),
                 "name": a.get("query", ""),
                 "coordinates": {"latitude": _latitude(rng), "longitude": _longitude(rng)}}
                for _ in range(rng.randrange(1, 3))
            ]
        },
        "Search_Taxi": _taxi_results_payload,
        "Search_Airport_Taxi": _taxi_results_payload,
        "Get_Taxi_Details": lambda a, rng: {
            "result": {
                "result_id": a.get("result_id", ""),
                "supplier": f"{rng.choice(('Metro', 'City', 'Star'))} Cars",
                "passenger_capacity": rng.randrange(2, 8),
            },
            "search_id": a.get("search_id", ""),
        },
        "Book_Taxi_Quote": lambda a, rng: {
            "quote": {
                "quote_id": _digits(rng, 9),
                "result_id": a.get("result_id", ""),
                "total": _price(rng, 18, 140),
                "expires_at": f"{_date(rng)} {_time(rng)}",
            }
        },
        "Get_Taxi_Cancellation_Policy": lambda a, rng: {
            "policy": {
                "free_cancellation_hours": rng.choice((1, 2, 24, 48)),
                "late_fee": _price(rng, 5, 40),
            }
        },
        "Get_Driver_Ratings": lambda a, rng: {
            "ratings": {"average": _score(rng), "count": rng.randrange(5, 900)}
        },
        "Get_Taxi_Fare_Estimate": lambda a, rng: {
            "estimate": {
                "low": _price(rng, 12, 40),
                "high": _price(rng, 45, 160),
            }
        },
    }


class MockUpstream:
    """Seeded synthetic responses shaped like travel-booking APIs."""

    def __init__(self):
        self._registry = build_mock_registry()
        self._builders = _builders()
        missing = set(self._registry) ^ set(self._builders)
        assert not missing, f"builder/schema mismatch: {missing}"

    def registry(self) -> dict[str, FunctionSchema]:
        return dict(self._registry)

    def respond(self, call: ToolCall, seed: int) -> Observation:
        builder = self._builders.get(call.function)
        if builder is None:
            raise UpstreamError(f"unknown function {call.function!r}")
        rng = random.Random(derive_seed("mock-upstream", seed, canonical_key(call)))
        return Observation.success(builder(call.args, rng))

    def sample_args(self, function: str, rng: random.Random) -> dict:
        schema = self._registry.get(function)
        if schema is None:
            raise UpstreamError(f"unknown function {function!r}")
        args: dict = {}
        for pname, spec in schema.params.items():
            if not spec.required and rng.random() < 0.5:
                continue
            args[pname] = self._sample_param(pname, spec, rng)
        for start, end in (("pick_up_date", "drop_off_date"),
                           ("arrival_date", "departure_date"),
                           ("departure_date", "return_date")):
            if start in args and end in args:
                args[start], args[end] = _date_pair(rng)
        return args

    def _sample_param(self, pname: str, spec: ParamSpec, rng: random.Random) -> Value:
        if spec.constraint is not None:
            kind = spec.constraint.kind
            if kind is ConstraintKind.DATE:
                return _date(rng)
            if kind is ConstraintKind.TIME:
                return _time(rng)
            if kind is ConstraintKind.LATITUDE:
                return _latitude(rng)
            if kind is ConstraintKind.LONGITUDE:
                return _longitude(rng)
            if kind is ConstraintKind.ENUM:
                return rng.choice(spec.constraint.values)
            if kind is ConstraintKind.NON_EMPTY:
                if pname == "query":
                    pool = CITIES + LANDMARKS
                    return pool[rng.randrange(len(pool))]
                # opaque ids sampled cold (location-independent steps)
                return _digits(rng, 9)
        if spec.type is ParamType.INTEGER:
            return rng.randrange(1, 5)
        if spec.type is ParamType.FLOAT:
            return round(rng.uniform(0, 100), 2)
        if spec.type is ParamType.BOOLEAN:
            return rng.random() < 0.5
        return _digits(rng, 6)


def build_mock_cache(
    templates: list[WorkflowTemplate], breadth: int, seed: int
) -> CacheStore:
    """Expand every template against the mock upstream into a frozen store."""
    upstream = MockUpstream()
    store = CacheStore()
    for template in sorted(templates, key=lambda t: t.id):
        expand_workflow(template, upstream, store, breadth, seed)
    return store.freeze()
