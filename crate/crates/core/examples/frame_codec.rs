//! Build DF17 position and velocity squitters, then decode them again.

use soda::frames::*;

fn main() -> Result<(), FrameError> {
    let icao = IcaoAddress::new(0x40621D)?;
    let ca = Capability::new(5)?;
    let state = AircraftState {
        latitude: 52.2572,
        longitude: 3.9194,
        altitude: 11_582.4,
        ground_speed: 230.0,
        heading: 72.0,
        timestamp: 0.0,
    };

    for (name, me) in [
        ("even position", encode_airborne_position(&state, false)?),
        ("odd position", encode_airborne_position(&state, true)?),
        ("velocity", encode_airborne_velocity(&state)?),
    ] {
        let raw = encode_frame(ca, icao, me);
        let back = decode_frame(&raw)?;
        println!(
            "{name:<14} {}  tc={:>2} icao={} parity={:06X}",
            raw.to_hex(),
            back.me.type_code().0,
            back.icao,
            back.parity
        );
    }

    let mut corrupted = encode_frame(ca, icao, encode_airborne_velocity(&state)?);
    corrupted.flip_bit(60);
    println!(
        "one flipped bit: {:?}",
        decode_frame(&corrupted).unwrap_err()
    );

    let (lat_cpr, lon_cpr) = cpr_encode(state.latitude, state.longitude, false);
    println!(
        "even CPR ({lat_cpr}, {lon_cpr}), NL = {}",
        cpr_nl(state.latitude)
    );
    Ok(())
}
