//! Geocoding providers, the radius-to-bounding-box conversion, and raw OSM
//! retrieval over HTTP.

use std::collections::BTreeMap;
use std::io::Read;
use std::time::Duration;

use crate::geo::GeoPoint;

use super::OsmError;

/// Meters per degree of latitude; also the equatorial meters per degree of
/// longitude.
pub const METERS_PER_DEGREE: f64 = 111_195.0;

/// Search radius applied when the user names none.
pub const DEFAULT_RADIUS_M: f64 = 1_000.0;

/// Response-size cap for [`fetch_osm`].
pub const DEFAULT_FETCH_CAP_BYTES: u64 = 64 * 1024 * 1024;

const MAX_RADIUS_M: f64 = 50_000.0;
const MAX_BBOX_LAT: f64 = 85.0;

/// A resolved place name.
#[derive(Debug, Clone, PartialEq)]
pub struct GeocodeResult {
    pub query: String,
    pub point: GeoPoint,
    pub provider: String,
}

/// Geographic query window, degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

/// Expands a center point by `radius_m` in every direction, correcting the
/// longitude width for latitude.
pub fn bbox_around(center: GeoPoint, radius_m: f64) -> Result<BoundingBox, OsmError> {
    if !radius_m.is_finite() || radius_m <= 0.0 || radius_m > MAX_RADIUS_M {
        return Err(OsmError::RadiusOutOfRange(radius_m));
    }
    if center.lat.abs() > MAX_BBOX_LAT {
        return Err(OsmError::PolarUndefined(center.lat));
    }
    let dlat = radius_m / METERS_PER_DEGREE;
    let dlon = dlat / center.lat.to_radians().cos();
    Ok(BoundingBox {
        min_lat: (center.lat - dlat).max(-90.0),
        min_lon: (center.lon - dlon).max(-180.0),
        max_lat: (center.lat + dlat).min(90.0),
        max_lon: (center.lon + dlon).min(180.0),
    })
}

/// Place-name resolution backend.
pub trait Geocoder {
    fn resolve(&self, name: &str) -> Result<GeocodeResult, OsmError>;
    fn label(&self) -> &str;
}

/// Resolves a place name through the given provider. The first candidate
/// wins.
pub fn geocode(name: &str, provider: &dyn Geocoder) -> Result<GeocodeResult, OsmError> {
    if name.trim().is_empty() {
        return Err(OsmError::EmptyQuery);
    }
    provider.resolve(name)
}

/// In-memory provider for tests and offline runs.
#[derive(Debug, Clone, Default)]
pub struct FixtureGeocoder {
    entries: BTreeMap<String, GeoPoint>,
}

impl FixtureGeocoder {
    pub fn new<I: IntoIterator<Item = (String, GeoPoint)>>(entries: I) -> Self {
        Self {
            entries: entries.into_iter().collect(),
        }
    }
}

impl Geocoder for FixtureGeocoder {
    fn resolve(&self, name: &str) -> Result<GeocodeResult, OsmError> {
        match self.entries.get(name) {
            Some(&point) => Ok(GeocodeResult {
                query: name.to_string(),
                point,
                provider: self.label().to_string(),
            }),
            None => Err(OsmError::GeocodeNotFound(name.to_string())),
        }
    }

    fn label(&self) -> &str {
        "fixture"
    }
}

/// HTTP geocoder speaking the conventional `?q=<name>&format=json` search
/// protocol with a JSON array of `{"lat": .., "lon": ..}` candidates.
#[derive(Debug, Clone)]
pub struct HttpGeocoder {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
}

impl HttpGeocoder {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            timeout: Duration::from_secs(30),
        }
    }
}

fn candidate_coord(value: &serde_json::Value, key: &str) -> Option<f64> {
    match value.get(key)? {
        serde_json::Value::Number(n) => n.as_f64(),
        serde_json::Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

impl Geocoder for HttpGeocoder {
    fn resolve(&self, name: &str) -> Result<GeocodeResult, OsmError> {
        let agent = ureq::AgentBuilder::new().timeout(self.timeout).build();
        let mut request = agent.get(&self.endpoint).query("q", name).query("format", "json");
        if let Some(key) = &self.api_key {
            request = request.query("key", key);
        }
        let response = match request.call() {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) if code == 401 || code == 403 || code == 429 => {
                return Err(OsmError::ProviderRejected(code))
            }
            Err(e) => return Err(OsmError::ProviderUnreachable(e.to_string())),
        };
        let body = response
            .into_string()
            .map_err(|e| OsmError::ProviderUnreachable(e.to_string()))?;
        let value: serde_json::Value =
            serde_json::from_str(&body).map_err(|e| OsmError::ProviderUnreachable(format!("bad JSON: {e}")))?;
        let candidates = value
            .as_array()
            .ok_or_else(|| OsmError::ProviderUnreachable("expected a JSON array of candidates".into()))?;
        let first = candidates
            .first()
            .ok_or_else(|| OsmError::GeocodeNotFound(name.to_string()))?;
        let lat = candidate_coord(first, "lat")
            .ok_or_else(|| OsmError::ProviderUnreachable("candidate missing lat".into()))?;
        let lon = candidate_coord(first, "lon")
            .ok_or_else(|| OsmError::ProviderUnreachable("candidate missing lon".into()))?;
        Ok(GeocodeResult {
            query: name.to_string(),
            point: GeoPoint::new(lon, lat).map_err(|e| OsmError::ProviderUnreachable(e.to_string()))?,
            provider: self.label().to_string(),
        })
    }

    fn label(&self) -> &str {
        "http"
    }
}

/// Downloads raw OSM XML for a bounding box, map-API style:
/// `GET {endpoint}?bbox=min_lon,min_lat,max_lon,max_lat`. The body is
/// returned unmodified so callers can persist it. Retries once on a
/// transport failure.
pub fn fetch_osm(
    bbox: &BoundingBox,
    endpoint: &str,
    timeout: Duration,
    max_bytes: u64,
) -> Result<Vec<u8>, OsmError> {
    let agent = ureq::AgentBuilder::new().timeout(timeout).build();
    let bbox_param = format!(
        "{},{},{},{}",
        bbox.min_lon, bbox.min_lat, bbox.max_lon, bbox.max_lat
    );

    let mut last_err = None;
    for attempt in 0..2 {
        if attempt > 0 {
            std::thread::sleep(Duration::from_millis(250));
        }
        match agent.get(endpoint).query("bbox", &bbox_param).call() {
            Ok(response) => {
                let mut body = Vec::new();
                let mut reader = response.into_reader().take(max_bytes + 1);
                reader
                    .read_to_end(&mut body)
                    .map_err(|e| OsmError::HttpFailure(e.to_string()))?;
                if body.len() as u64 > max_bytes {
                    return Err(OsmError::PayloadTooLarge { limit: max_bytes });
                }
                return Ok(body);
            }
            Err(ureq::Error::Status(code, _)) => {
                return Err(OsmError::HttpFailure(format!("server returned status {code}")))
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(OsmError::HttpFailure(
        last_err.map(|e| e.to_string()).unwrap_or_else(|| "unknown transport failure".into()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::net::TcpListener;

    #[test]
    fn fixture_geocoder_maps_names() {
        let provider = FixtureGeocoder::new([(
            "TestTown".to_string(),
            GeoPoint::new(20.0, 10.0).unwrap(),
        )]);
        let result = geocode("TestTown", &provider).unwrap();
        assert_eq!(result.point.lat, 10.0);
        assert_eq!(result.point.lon, 20.0);
        assert_eq!(result.provider, "fixture");
    }

    #[test]
    fn empty_name_is_rejected() {
        let provider = FixtureGeocoder::default();
        assert!(matches!(geocode("  ", &provider), Err(OsmError::EmptyQuery)));
    }

    #[test]
    fn unknown_name_is_not_found() {
        let provider = FixtureGeocoder::default();
        assert!(matches!(
            geocode("Nowhere", &provider),
            Err(OsmError::GeocodeNotFound(_))
        ));
    }

    #[test]
    fn bbox_at_equator_is_symmetric() {
        // A tenth of a degree of latitude, well inside the radius cap.
        let b = bbox_around(GeoPoint::new(0.0, 0.0).unwrap(), METERS_PER_DEGREE / 10.0).unwrap();
        assert!((b.min_lat + 0.1).abs() < 1e-9);
        assert!((b.max_lat - 0.1).abs() < 1e-9);
        assert!((b.min_lon + 0.1).abs() < 1e-9);
        assert!((b.max_lon - 0.1).abs() < 1e-9);
    }

    #[test]
    fn bbox_longitude_widens_with_latitude() {
        // At 60 degrees the cosine correction doubles the longitude width.
        let b = bbox_around(GeoPoint::new(0.0, 60.0).unwrap(), METERS_PER_DEGREE / 10.0).unwrap();
        let half_width = (b.max_lon - b.min_lon) / 2.0;
        assert!((half_width - 0.2).abs() < 1e-9, "got {half_width}");
    }

    #[test]
    fn bad_radii_are_rejected() {
        let c = GeoPoint::new(0.0, 0.0).unwrap();
        assert!(matches!(bbox_around(c, 0.0), Err(OsmError::RadiusOutOfRange(_))));
        assert!(matches!(bbox_around(c, 60_000.0), Err(OsmError::RadiusOutOfRange(_))));
        let polar = GeoPoint::new(0.0, 88.0).unwrap();
        assert!(matches!(bbox_around(polar, 100.0), Err(OsmError::PolarUndefined(_))));
    }

    #[test]
    fn bbox_grows_monotonically_with_radius() {
        let c = GeoPoint::new(30.0, 45.0).unwrap();
        let small = bbox_around(c, 500.0).unwrap();
        let large = bbox_around(c, 5_000.0).unwrap();
        assert!(large.min_lat <= small.min_lat && large.max_lat >= small.max_lat);
        assert!(large.min_lon <= small.min_lon && large.max_lon >= small.max_lon);
    }

    fn serve_once(body: Vec<u8>, status_line: &'static str) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            if let Ok((mut stream, _)) = listener.accept() {
                let mut buf = [0u8; 4096];
                let _ = std::io::Read::read(&mut stream, &mut buf);
                let header = format!(
                    "{status_line}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                    body.len()
                );
                let _ = stream.write_all(header.as_bytes());
                let _ = stream.write_all(&body);
            }
        });
        format!("http://{addr}/api/map")
    }

    #[test]
    fn fetch_returns_body_unmodified() {
        let fixture = b"<osm version=\"0.6\"><node id=\"1\" lat=\"1\" lon=\"2\"/></osm>".to_vec();
        let endpoint = serve_once(fixture.clone(), "HTTP/1.1 200 OK");
        let bbox = bbox_around(GeoPoint::new(2.0, 1.0).unwrap(), 500.0).unwrap();
        let body = fetch_osm(&bbox, &endpoint, Duration::from_secs(5), DEFAULT_FETCH_CAP_BYTES).unwrap();
        assert_eq!(body, fixture);
    }

    #[test]
    fn fetch_reports_unreachable_endpoint() {
        // A bound-then-dropped listener leaves a port nothing listens on.
        let port = {
            let l = TcpListener::bind("127.0.0.1:0").unwrap();
            l.local_addr().unwrap().port()
        };
        let bbox = bbox_around(GeoPoint::new(2.0, 1.0).unwrap(), 500.0).unwrap();
        let err = fetch_osm(
            &bbox,
            &format!("http://127.0.0.1:{port}/map"),
            Duration::from_millis(300),
            DEFAULT_FETCH_CAP_BYTES,
        )
        .unwrap_err();
        assert!(matches!(err, OsmError::HttpFailure(_)));
    }

    #[test]
    fn fetch_enforces_size_cap() {
        let endpoint = serve_once(vec![b'x'; 4096], "HTTP/1.1 200 OK");
        let bbox = bbox_around(GeoPoint::new(2.0, 1.0).unwrap(), 500.0).unwrap();
        let err = fetch_osm(&bbox, &endpoint, Duration::from_secs(5), 1024).unwrap_err();
        assert!(matches!(err, OsmError::PayloadTooLarge { limit: 1024 }));
    }

    #[test]
    fn http_geocoder_parses_first_candidate() {
        let body = br#"[{"lat": "52.52", "lon": 13.405}, {"lat": 0, "lon": 0}]"#.to_vec();
        let endpoint = serve_once(body, "HTTP/1.1 200 OK");
        let provider = HttpGeocoder {
            endpoint,
            api_key: None,
            timeout: Duration::from_secs(5),
        };
        let result = geocode("Berlin", &provider).unwrap();
        assert!((result.point.lat - 52.52).abs() < 1e-9);
        assert!((result.point.lon - 13.405).abs() < 1e-9);
    }

    #[test]
    fn http_geocoder_maps_empty_candidates_to_not_found() {
        let endpoint = serve_once(b"[]".to_vec(), "HTTP/1.1 200 OK");
        let provider = HttpGeocoder {
            endpoint,
            api_key: None,
            timeout: Duration::from_secs(5),
        };
        assert!(matches!(
            geocode("Atlantis", &provider),
            Err(OsmError::GeocodeNotFound(_))
        ));
    }

    #[test]
    fn http_geocoder_reports_rejection() {
        let endpoint = serve_once(b"denied".to_vec(), "HTTP/1.1 403 Forbidden");
        let provider = HttpGeocoder {
            endpoint,
            api_key: None,
            timeout: Duration::from_secs(5),
        };
        assert!(matches!(
            geocode("Berlin", &provider),
            Err(OsmError::ProviderRejected(403))
        ));
    }
}
