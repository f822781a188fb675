"""Solar geometry: declination, elevation/azimuth, and text prompt rendering."""

from __future__ import annotations

import datetime as _dt
import math
from dataclasses import dataclass

from shadecast.geo import GeoPoint

DECLINATION_AMPLITUDE_DEG = 23.44


@dataclass(frozen=True)
class TimeStamp:
    year: int
    month: int
    day: int
    local_hour: float  # fractional hours [0, 24)
    utc_offset_hours: float = 0.0

    def __post_init__(self):
        _dt.date(self.year, self.month, self.day)  # validates the date
        if not (0.0 <= self.local_hour < 24.0):
            raise ValueError(f"local_hour {self.local_hour} outside [0, 24)")

    @property
    def day_of_year(self) -> int:
        return _dt.date(self.year, self.month, self.day).timetuple().tm_yday

    def to_utc_datetime(self) -> _dt.datetime:
        base = _dt.datetime(self.year, self.month, self.day)
        return base + _dt.timedelta(hours=self.local_hour - self.utc_offset_hours)

    def hours_between(self, other: "TimeStamp") -> float:
        delta = self.to_utc_datetime() - other.to_utc_datetime()
        return abs(delta.total_seconds()) / 3600.0


@dataclass(frozen=True)
class SunPosition:
    declination_deg: float
    elevation_deg: float
    azimuth_deg: float  # clockwise from true north, [0, 360)
    hour_angle_deg: float


def declination(day_of_year: int) -> float:
    """Cooper's formula for solar declination in degrees."""
    if not (1 <= day_of_year <= 366):
        raise ValueError(f"day_of_year {day_of_year} outside [1, 366]")
    return DECLINATION_AMPLITUDE_DEG * math.sin(
        math.radians(360.0 * (284 + day_of_year) / 365.0)
    )


def equation_of_time_minutes(day_of_year: int) -> float:
    """Spencer's Fourier fit of the equation of time, in minutes."""
    b = 2.0 * math.pi * (day_of_year - 1) / 365.0
    return 229.18 * (
        0.000075
        + 0.001868 * math.cos(b)
        - 0.032077 * math.sin(b)
        - 0.014615 * math.cos(2 * b)
        - 0.040890 * math.sin(2 * b)
    )


def solar_time_hours(point: GeoPoint, t: TimeStamp, apply_eot: bool = True) -> float:
    longitude_correction = 4.0 * (point.lon - 15.0 * t.utc_offset_hours) / 60.0
    eot = equation_of_time_minutes(t.day_of_year) / 60.0 if apply_eot else 0.0
    return t.local_hour + longitude_correction + eot


def sun_position(point: GeoPoint, t: TimeStamp, apply_eot: bool = True) -> SunPosition:
    """Sun declination/elevation/azimuth for a place and time.

    Elevation may be negative (night). Azimuth is compass convention:
    0 = north, 90 = east, disambiguated by the sign of the hour angle.
    """
    decl = declination(t.day_of_year)
    hour_angle = 15.0 * (solar_time_hours(point, t, apply_eot) - 12.0)

    lat_r = math.radians(point.lat)
    dec_r = math.radians(decl)
    h_r = math.radians(hour_angle)

    sin_el = math.sin(lat_r) * math.sin(dec_r) + math.cos(lat_r) * math.cos(dec_r) * math.cos(h_r)
    sin_el = max(-1.0, min(1.0, sin_el))
    el_r = math.asin(sin_el)
    elevation = math.degrees(el_r)

    cos_el = math.cos(el_r)
    if cos_el < 1e-12:
        azimuth = 180.0  # sun at zenith: azimuth degenerate, pick due south
    else:
        cos_az = (math.sin(dec_r) - sin_el * math.sin(lat_r)) / (cos_el * math.cos(lat_r))
        cos_az = max(-1.0, min(1.0, cos_az))
        azimuth = math.degrees(math.acos(cos_az))
        if hour_angle > 0.0:
            azimuth = 360.0 - azimuth
    azimuth %= 360.0
    return SunPosition(
        declination_deg=decl,
        elevation_deg=elevation,
        azimuth_deg=azimuth,
        hour_angle_deg=hour_angle,
    )


PROMPT_TEMPLATES = ("declination", "angle", "time_of_day")


@dataclass(frozen=True)
class TextPrompt:
    text: str
    template_id: str


def _clock_string(local_hour: float) -> str:
    total_minutes = int(round(local_hour * 60.0)) % (24 * 60)
    hh, mm = divmod(total_minutes, 60)
    suffix = "AM" if hh < 12 else "PM"
    h12 = hh % 12
    if h12 == 0:
        h12 = 12
    return f"{h12}:{mm:02d} {suffix}"


def format_prompt(sun: SunPosition, t: TimeStamp, template_id: str) -> TextPrompt:
    """Render one of the three fixed prompt templates, byte-deterministically."""
    if template_id == "declination":
        d = round(sun.declination_deg, 1) + 0.0  # avoid "-0.0"
        text = f"Solar declination: {d:.1f}°"
    elif template_id == "angle":
        a = round(sun.elevation_deg) + 0.0
        text = f"Angle: {a:.0f}°"
    elif template_id == "time_of_day":
        text = f"Right now, it is {_clock_string(t.local_hour)} in a day."
    else:
        raise ValueError(f"unknown template_id {template_id!r}")
    return TextPrompt(text=text, template_id=template_id)
