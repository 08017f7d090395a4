"""Physical and geodetic constants used throughout the simulator.

All orbital quantities are carried in kilometers and seconds; optics
use SI meters.  Values can be overridden per scenario through the
configuration layer; these are the shipped defaults.
"""

MU_EARTH_KM3_S2 = 398600.4418       # gravitational parameter GM of Earth
R_EARTH_KM = 6378.137               # equatorial radius
J2_EARTH = 1.08263e-3               # second zonal harmonic coefficient
OMEGA_EARTH_RAD_S = 7.2921159e-5    # sidereal rotation rate
SIDEREAL_DAY_S = 86164.0905
C_LIGHT_KM_S = 299792.458
