#include <httplib.h>

#include <regex>

#include "cdrag/error.hpp"
#include "cdrag/perception/perception.hpp"

namespace cdrag::perception {

RemoteBackend::RemoteBackend(RemoteOptions options) : options_(std::move(options)) {
  static const std::regex kUrl(R"(^http://([A-Za-z0-9.\-]+)(?::(\d{1,5}))?/?$)");
  std::smatch m;
  if (!std::regex_match(options_.url, m, kUrl)) {
    throw Error(ErrorCode::InvalidArgument, "malformed perception URL: " + options_.url);
  }
  host_ = m[1].str();
  port_ = m[2].matched ? std::stoi(m[2].str()) : 80;
  if (options_.width <= 0 || options_.height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "remote backend needs image dimensions");
  }
}

Json RemoteBackend::post(const std::string& path, const Json& body, bool allow_404) const {
  httplib::Client client(host_, port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  auto res = client.Post(path, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::BackendUnavailable,
                "perception service unreachable: " + httplib::to_string(res.error()));
  }
  if (allow_404 && res->status == 404) {
    return nullptr;
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorCode::BackendUnavailable,
                "perception service returned HTTP " + std::to_string(res->status));
  }
  try {
    return Json::parse(res->body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::FixtureSchemaInvalid, std::string("perception response: ") + e.what());
  }
}

ImageInfo RemoteBackend::image_info(const std::string& image_ref) const {
  return {image_ref, options_.width, options_.height};
}

std::optional<Mask> RemoteBackend::segment(const std::string& image_ref, Point2 start) const {
  const Json reply = post("/segment", Json{{"image_ref", image_ref}, {"point", start}}, true);
  if (reply.is_null()) return std::nullopt;
  try {
    Mask m = Mask::from_flat_rle(options_.width, options_.height,
                                 reply.at("rle").get<std::vector<std::int64_t>>());
    if (m.empty()) return std::nullopt;
    return m;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FixtureSchemaInvalid, std::string("segment response: ") + e.what());
  }
}

std::vector<Detection> RemoteBackend::detect(const std::string& image_ref,
                                             const Mask& controlled) const {
  const Json body{{"image_ref", image_ref},
                  {"prompt", options_.prompt_template},
                  {"controlled_mask_rle", controlled.flat_rle()}};
  const Json reply = post("/perceive", body, false);
  std::vector<Detection> out;
  try {
    for (const Json& jd : reply.at("detections")) {
      Detection d;
      d.bbox = jd.at("bbox").get<BBox>();
      d.category = jd.at("category").get<std::string>();
      d.confidence = jd.value("confidence", 1.0);
      if (!(d.confidence >= 0.0 && d.confidence <= 1.0) || !d.bbox.is_valid()) {
        throw Error(ErrorCode::FixtureSchemaInvalid, "detection out of range");
      }
      if (jd.contains("refined_bbox")) {
        // Service already refined the box; carry it as the detection box.
        d.bbox = jd.at("refined_bbox").get<BBox>();
      }
      if (jd.contains("rle")) {
        d.mask = Mask::from_flat_rle(options_.width, options_.height,
                                     jd.at("rle").get<std::vector<std::int64_t>>());
      }
      out.push_back(std::move(d));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::FixtureSchemaInvalid, std::string("perceive response: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::FixtureSchemaInvalid) throw;
    throw Error(ErrorCode::FixtureSchemaInvalid, std::string("perceive response: ") + e.what());
  }
  return out;
}

Refinement RemoteBackend::refine(const std::string& /*image_ref*/, const Detection& d) const {
  const BBox box{std::clamp(d.bbox.x1, 0.0, static_cast<double>(options_.width)),
                 std::clamp(d.bbox.y1, 0.0, static_cast<double>(options_.height)),
                 std::clamp(d.bbox.x2, 0.0, static_cast<double>(options_.width)),
                 std::clamp(d.bbox.y2, 0.0, static_cast<double>(options_.height))};
  if (d.mask && !d.mask->empty()) {
    return {box, *d.mask};
  }
  return {box, Mask::from_box(options_.width, options_.height, box)};
}

}  // namespace cdrag::perception
