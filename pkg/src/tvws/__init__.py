"""TV white space estimation over zone rasters and minimum-channel reassignment
of TV transmitters in the UHF 470-590 MHz band."""

from .geo import GeoPoint, RasterGrid, ZoneRegion, haversine_distance, make_grid
from .propagation import Environment, channel_bounds, dbu_to_dbm, hata_inverse_distance, hata_path_loss
from .regulatory import ExclusionZone, RegulatoryParams, Transmitter, exclusion_zones
from .wsmap import AvailabilityRaster, availability_raster, ccdf, zone_average

__all__ = [
    "AvailabilityRaster", "Environment", "ExclusionZone", "GeoPoint", "RasterGrid",
    "RegulatoryParams", "Transmitter", "ZoneRegion", "availability_raster", "ccdf",
    "channel_bounds", "dbu_to_dbm", "exclusion_zones", "hata_inverse_distance",
    "hata_path_loss", "haversine_distance", "make_grid", "zone_average",
]

__version__ = "0.1.0"
