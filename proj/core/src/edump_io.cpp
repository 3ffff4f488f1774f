#include "gprobe/edump_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "gprobe/checksum.hpp"
#include "gprobe/errors.hpp"

namespace gprobe {

namespace {

using json = nlohmann::json;

constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kDumpHeader = 16;
constexpr std::size_t kRecordHeader = 8;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<std::byte>(v)); }
  void u16(std::uint16_t v) {
    for (int k = 0; k < 2; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void u64(std::uint64_t v) {
    for (int k = 0; k < 8; ++k) u8(static_cast<std::uint8_t>(v >> (8 * k)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::string_view s) {
    for (char c : s) u8(static_cast<std::uint8_t>(c));
  }
  std::vector<std::byte>& bytes() { return buf_; }

 private:
  std::vector<std::byte> buf_;
};

class ByteReader {
 public:
  ByteReader(std::span<const std::byte> bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  void need(std::size_t n) const {
    if (remaining() < n) {
      throw TruncatedError(what_ + ": truncated at byte " + std::to_string(pos_) + " (needed " +
                           std::to_string(n) + ", have " + std::to_string(remaining()) + ")");
    }
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = 0;
    for (int k = 0; k < 2; ++k) v |= static_cast<std::uint16_t>(u8()) << (8 * k);
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(u8()) << (8 * k);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(u8()) << (8 * k);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string raw(std::size_t n) {
    need(n);
    std::string s(n, '\0');
    std::memcpy(s.data(), bytes_.data() + pos_, n);
    pos_ += n;
    return s;
  }

  void expect_magic(std::string_view magic) {
    if (remaining() < magic.size()) {
      throw TruncatedError(what_ + ": file too short for its magic");
    }
    const auto got = raw(magic.size());
    if (got != magic) throw BadMagicError(what_ + ": bad magic, expected '" + std::string(magic) + "'");
  }
  void expect_version() {
    const auto v = u32();
    if (v != kVersion) {
      throw VersionError(what_ + ": unsupported version " + std::to_string(v) + " (expected " +
                         std::to_string(kVersion) + ")");
    }
  }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

std::vector<std::byte> read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw IoError("failed reading " + path.string());
  }
  return bytes;
}

void write_binary(const std::filesystem::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(what + ": " + e.what());
  }
}

template <class T>
T field(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw InputError(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(what + ": field '" + key + "': " + e.what());
  }
}

void check_record(const EmbeddingRecord& r, const DumpManifest& m, std::size_t index) {
  const auto where = "record " + std::to_string(index) + " (sentence " +
                     std::to_string(r.sentence_id) + ")";
  if (r.vector.size() != m.d_emb) {
    throw DimensionError(where + ": vector has " + std::to_string(r.vector.size()) +
                         " entries, manifest d_emb is " + std::to_string(m.d_emb));
  }
  if (static_cast<unsigned>(r.variant) > 2 || static_cast<unsigned>(r.role) > 1 ||
      !valid_combination(r.variant, r.role)) {
    throw InputError(where + ": invalid variant/role combination " +
                     std::to_string(static_cast<unsigned>(r.variant)) + "/" +
                     std::to_string(static_cast<unsigned>(r.role)));
  }
  if (std::find(m.layers.begin(), m.layers.end(), r.layer) == m.layers.end()) {
    throw InputError(where + ": layer " + std::to_string(r.layer) + " not listed in manifest");
  }
  const SentenceEntry* s = m.find_sentence(r.sentence_id);
  if (!s) throw InputError(where + ": sentence id not in manifest");
  if (!s->variants.empty()) {
    const auto label = std::string(variant_label(r.variant));
    if (std::find(s->variants.begin(), s->variants.end(), label) == s->variants.end()) {
      throw InputError(where + ": variant " + label + " not listed for the sentence");
    }
  }
  for (float x : r.vector) {
    if (!std::isfinite(x)) throw InputError(where + ": non-finite value");
  }
}

}  // namespace

std::string_view variant_label(RecordVariant variant) {
  switch (variant) {
    case RecordVariant::Baseline: return "both_masked";
    case RecordVariant::NounRevealed: return "noun_revealed";
    case RecordVariant::PronounRevealed: return "pronoun_revealed";
  }
  return "unknown";
}

bool valid_combination(RecordVariant variant, RecordRole role) {
  switch (variant) {
    case RecordVariant::Baseline: return role == RecordRole::Pronoun || role == RecordRole::Noun;
    case RecordVariant::NounRevealed: return role == RecordRole::Pronoun;
    case RecordVariant::PronounRevealed: return role == RecordRole::Noun;
  }
  return false;
}

const SentenceEntry* DumpManifest::find_sentence(std::uint32_t id) const {
  // Sentences are usually stored by id; fall back to a scan otherwise.
  if (id < sentences.size() && sentences[id].id == id) return &sentences[id];
  for (const auto& s : sentences) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const ProbeTargets* DumpManifest::find_targets(std::uint32_t sentence_id) const {
  if (sentence_id < targets.size() && targets[sentence_id].sentence_id == sentence_id) {
    return &targets[sentence_id];
  }
  for (const auto& t : targets) {
    if (t.sentence_id == sentence_id) return &t;
  }
  return nullptr;
}

std::filesystem::path manifest_path(const std::filesystem::path& dump) {
  auto p = dump;
  p += ".json";
  return p;
}

void save_manifest(const std::filesystem::path& path, const DumpManifest& m) {
  json doc;
  doc["format"] = "GEDT";
  doc["version"] = kVersion;
  doc["model_id"] = m.model_id;
  doc["tokenizer_id"] = m.tokenizer_id;
  doc["d_emb"] = m.d_emb;
  doc["layers"] = m.layers;
  auto& sentences = doc["sentences"] = json::array();
  for (const auto& s : m.sentences) {
    json j{{"id", s.id}, {"text", s.text}, {"noun", s.noun}, {"variants", s.variants}};
    if (s.split) j["split"] = std::string(to_string(*s.split));
    sentences.push_back(std::move(j));
  }
  auto& targets = doc["targets"] = json::array();
  for (const auto& t : m.targets) {
    json j{{"sentence_id", t.sentence_id}, {"gender", t.gender}};
    j["bias"] = t.bias ? json(*t.bias) : json(nullptr);
    targets.push_back(std::move(j));
  }
  doc["record_count"] = m.record_count;
  doc["file_size"] = m.file_size;
  doc["crc32"] = m.crc32;
  write_text_file(path, doc.dump(1) + "\n");
}

DumpManifest load_manifest(const std::filesystem::path& path) {
  const auto what = "manifest " + path.string();
  const json doc = parse_json(read_text_file(path), what);
  if (!doc.is_object()) throw InputError(what + ": expected a JSON object");
  if (doc.value("format", std::string{}) != "GEDT") throw InputError(what + ": not a GEDT manifest");
  if (doc.value("version", 0u) != kVersion) {
    throw VersionError(what + ": unsupported manifest version");
  }
  DumpManifest m;
  m.model_id = doc.value("model_id", std::string{});
  m.tokenizer_id = doc.value("tokenizer_id", std::string{});
  m.d_emb = field<std::uint32_t>(doc, "d_emb", what);
  m.layers = field<std::vector<std::uint16_t>>(doc, "layers", what);
  for (const auto& j : doc.value("sentences", json::array())) {
    SentenceEntry s;
    s.id = field<std::uint32_t>(j, "id", what);
    s.text = j.value("text", std::string{});
    s.noun = j.value("noun", std::string{});
    s.variants = j.value("variants", std::vector<std::string>{});
    if (j.contains("split")) s.split = split_from_string(j["split"].get<std::string>());
    m.sentences.push_back(std::move(s));
  }
  for (const auto& j : doc.value("targets", json::array())) {
    ProbeTargets t;
    t.sentence_id = field<std::uint32_t>(j, "sentence_id", what);
    if (j.contains("bias") && !j["bias"].is_null()) t.bias = j["bias"].get<double>();
    t.gender = j.value("gender", std::vector<double>{});
    m.targets.push_back(std::move(t));
  }
  m.record_count = doc.value("record_count", std::uint64_t{0});
  m.file_size = doc.value("file_size", std::uint64_t{0});
  m.crc32 = doc.value("crc32", std::string{});
  return m;
}

std::uint32_t write_dump(const std::filesystem::path& path,
                         const std::vector<EmbeddingRecord>& records, DumpManifest& manifest) {
  if (manifest.d_emb == 0) throw InputError("manifest d_emb must be positive");
  for (std::size_t i = 0; i < records.size(); ++i) check_record(records[i], manifest, i);

  ByteWriter w;
  w.raw("GEDT");
  w.u32(kVersion);
  w.u32(manifest.d_emb);
  w.u32(static_cast<std::uint32_t>(records.size()));
  for (const auto& r : records) {
    w.u32(r.sentence_id);
    w.u8(static_cast<std::uint8_t>(r.variant));
    w.u8(static_cast<std::uint8_t>(r.role));
    w.u16(r.layer);
    for (float x : r.vector) w.f32(x);
  }
  const auto& bytes = w.bytes();
  const std::uint32_t crc = crc32(bytes);
  write_binary(path, bytes);
  manifest.record_count = records.size();
  manifest.file_size = bytes.size();
  manifest.crc32 = hex32(crc);
  save_manifest(manifest_path(path), manifest);
  return crc;
}

Dump read_dump(const std::filesystem::path& path) {
  const auto mpath = manifest_path(path);
  if (!std::filesystem::exists(mpath)) throw IoError("missing manifest " + mpath.string());
  Dump dump;
  dump.manifest = load_manifest(mpath);
  const auto bytes = read_binary(path);
  const auto what = "dump " + path.string();

  ByteReader r(bytes, what);
  r.expect_magic("GEDT");
  r.expect_version();
  const std::uint32_t d = r.u32();
  const std::uint32_t count = r.u32();
  const std::uint64_t expected =
      kDumpHeader + static_cast<std::uint64_t>(count) * (kRecordHeader + 4ull * d);
  if (bytes.size() < expected) {
    throw TruncatedError(what + ": " + std::to_string(bytes.size()) + " bytes, header declares " +
                         std::to_string(expected));
  }
  if (bytes.size() > expected) {
    throw IoError(what + ": " + std::to_string(bytes.size() - expected) + " trailing bytes");
  }
  const auto crc = hex32(crc32(bytes));
  if (crc != dump.manifest.crc32) {
    throw ChecksumError(what + ": CRC-32 " + crc + " does not match manifest " +
                        dump.manifest.crc32);
  }
  if (d != dump.manifest.d_emb) {
    throw DimensionError(what + ": d_emb " + std::to_string(d) + " differs from manifest " +
                         std::to_string(dump.manifest.d_emb));
  }
  if (count != dump.manifest.record_count) {
    throw InputError(what + ": record count differs from manifest");
  }

  dump.records.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    EmbeddingRecord& rec = dump.records[i];
    rec.sentence_id = r.u32();
    rec.variant = static_cast<RecordVariant>(r.u8());
    rec.role = static_cast<RecordRole>(r.u8());
    rec.layer = r.u16();
    rec.vector.resize(d);
    for (auto& x : rec.vector) x = r.f32();
    check_record(rec, dump.manifest, i);
  }
  return dump;
}

std::vector<ProbeSample> assemble_probe_samples(const std::vector<EmbeddingRecord>& records,
                                                const std::vector<ProbeTargets>& targets,
                                                std::uint16_t layer) {
  struct Group {
    const EmbeddingRecord* base_pronoun = nullptr;
    const EmbeddingRecord* base_noun = nullptr;
    const EmbeddingRecord* noun_revealed = nullptr;
    std::vector<const EmbeddingRecord*> pronoun_revealed;
  };
  std::map<std::uint32_t, Group> groups;
  for (const auto& r : records) {
    if (r.layer != layer) continue;
    Group& g = groups[r.sentence_id];
    const auto dup = [&](const EmbeddingRecord* existing) {
      if (existing) {
        throw InputError("sentence " + std::to_string(r.sentence_id) + ": duplicate " +
                         std::string(variant_label(r.variant)) + " record at layer " +
                         std::to_string(layer));
      }
    };
    if (r.variant == RecordVariant::Baseline && r.role == RecordRole::Pronoun) {
      dup(g.base_pronoun);
      g.base_pronoun = &r;
    } else if (r.variant == RecordVariant::Baseline && r.role == RecordRole::Noun) {
      dup(g.base_noun);
      g.base_noun = &r;
    } else if (r.variant == RecordVariant::NounRevealed) {
      dup(g.noun_revealed);
      g.noun_revealed = &r;
    } else {
      g.pronoun_revealed.push_back(&r);
    }
  }

  std::map<std::uint32_t, const ProbeTargets*> target_of;
  for (const auto& t : targets) target_of[t.sentence_id] = &t;

  auto diff = [](const EmbeddingRecord& a, const EmbeddingRecord& b) {
    if (a.vector.size() != b.vector.size()) {
      throw DimensionError("sentence " + std::to_string(a.sentence_id) +
                           ": records of different dimension");
    }
    Vector v(static_cast<Index>(a.vector.size()));
    for (std::size_t k = 0; k < a.vector.size(); ++k) {
      v[static_cast<Index>(k)] = static_cast<double>(a.vector[k]) - static_cast<double>(b.vector[k]);
    }
    return v;
  };

  std::vector<ProbeSample> out;
  for (const auto& [id, g] : groups) {
    const auto name = "sentence " + std::to_string(id);
    const auto tit = target_of.find(id);
    const ProbeTargets* t = tit == target_of.end() ? nullptr : tit->second;
    if (g.noun_revealed) {
      if (!g.base_pronoun) throw InputError(name + ": noun_revealed record has no baseline at the pronoun position");
      if (!t || !t->bias) throw InputError(name + ": no bias target");
      out.push_back({diff(*g.noun_revealed, *g.base_pronoun), *t->bias, Task::Bias, id});
    }
    if (!g.pronoun_revealed.empty()) {
      if (!g.base_noun) throw InputError(name + ": pronoun_revealed record has no baseline at the noun position");
      if (!t || t->gender.size() != g.pronoun_revealed.size()) {
        throw InputError(name + ": " + std::to_string(g.pronoun_revealed.size()) +
                         " pronoun_revealed records but " +
                         std::to_string(t ? t->gender.size() : 0) + " gender targets");
      }
      for (std::size_t k = 0; k < g.pronoun_revealed.size(); ++k) {
        out.push_back({diff(*g.pronoun_revealed[k], *g.base_noun), t->gender[k], Task::Gender, id});
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_probe(const std::filesystem::path& path, const JointProbe& probe) {
  probe.validate();
  const Index d = probe.dim();
  ByteWriter w;
  w.raw("GPRB");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(d));
  w.i32(probe.layer);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) w.f64(probe.rotation(i, j));
  }
  for (const Vector* v : {&probe.sv_bias, &probe.sv_gender, &probe.icpt_bias, &probe.icpt_gender}) {
    for (Index j = 0; j < d; ++j) w.f64((*v)[j]);
  }
  w.u32(crc32(w.bytes()));
  write_binary(path, w.bytes());
}

JointProbe read_probe(const std::filesystem::path& path) {
  const auto bytes = read_binary(path);
  const auto what = "probe " + path.string();
  ByteReader r(bytes, what);
  r.expect_magic("GPRB");
  r.expect_version();
  const auto d = static_cast<Index>(r.u32());
  JointProbe p;
  p.layer = r.i32();
  const auto body = static_cast<std::size_t>(d) * static_cast<std::size_t>(d + 4) * 8;
  r.need(body + 4);
  p.rotation.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) p.rotation(i, j) = r.f64();
  }
  for (Vector* v : {&p.sv_bias, &p.sv_gender, &p.icpt_bias, &p.icpt_gender}) {
    v->resize(d);
    for (Index j = 0; j < d; ++j) (*v)[j] = r.f64();
  }
  const auto end = r.position();
  const auto stored = r.u32();
  if (r.remaining() != 0) throw IoError(what + ": trailing bytes");
  if (crc32(std::span(bytes).first(end)) != stored) throw ChecksumError(what + ": checksum mismatch");
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------

std::vector<std::byte> encode_filter(const AffineFilter& f) {
  const Index d = f.dim();
  if (f.projection.cols() != d || f.offset.size() != d || f.mask.size() != static_cast<std::size_t>(d)) {
    throw DimensionError("filter parts have inconsistent dimensions");
  }
  ByteWriter w;
  w.raw("GFLT");
  w.u32(kVersion);
  w.u32(static_cast<std::uint32_t>(d));
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) w.f32(static_cast<float>(f.projection(i, j)));
  }
  for (Index j = 0; j < d; ++j) w.f32(static_cast<float>(f.offset[j]));
  for (auto m : f.mask) w.u8(m);
  const json trailer{{"kind", std::string(to_string(f.spec.kind))},
                     {"epsilon", f.spec.epsilon},
                     {"layer", f.spec.layer},
                     {"probe_hash", hex32(f.probe_hash)},
                     {"model_id", f.model_id}};
  const auto text = trailer.dump();
  w.u32(static_cast<std::uint32_t>(text.size()));
  w.raw(text);
  return std::move(w.bytes());
}

AffineFilter decode_filter(std::span<const std::byte> bytes) {
  ByteReader r(bytes, "filter");
  r.expect_magic("GFLT");
  r.expect_version();
  const auto d = static_cast<Index>(r.u32());
  r.need(static_cast<std::size_t>(d) * static_cast<std::size_t>(d + 1) * 4 + static_cast<std::size_t>(d));
  AffineFilter f;
  f.projection.resize(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) f.projection(i, j) = r.f32();
  }
  f.offset.resize(d);
  for (Index j = 0; j < d; ++j) f.offset[j] = r.f32();
  f.mask.resize(static_cast<std::size_t>(d));
  for (auto& m : f.mask) {
    m = r.u8();
    if (m > 1) throw IoError("filter: mask entry is not 0 or 1");
  }
  const auto len = r.u32();
  const json trailer = parse_json(r.raw(len), "filter trailer");
  if (r.remaining() != 0) throw IoError("filter: trailing bytes");
  f.spec.kind = filter_kind_from_string(field<std::string>(trailer, "kind", "filter trailer"));
  f.spec.epsilon = field<double>(trailer, "epsilon", "filter trailer");
  f.spec.layer = trailer.value("layer", -1);
  const auto hash = trailer.value("probe_hash", std::string{"00000000"});
  f.probe_hash = static_cast<std::uint32_t>(std::stoul(hash, nullptr, 16));
  f.model_id = trailer.value("model_id", std::string{});
  return f;
}

void write_filter(const std::filesystem::path& path, const AffineFilter& filter) {
  write_binary(path, encode_filter(filter));
}

AffineFilter read_filter(const std::filesystem::path& path) {
  try {
    return decode_filter(read_binary(path));
  } catch (const IoError& e) {
    // Re-raise with the path, keeping the error kind.
    const std::string msg = path.string() + ": " + e.what();
    if (dynamic_cast<const BadMagicError*>(&e)) throw BadMagicError(msg);
    if (dynamic_cast<const VersionError*>(&e)) throw VersionError(msg);
    if (dynamic_cast<const TruncatedError*>(&e)) throw TruncatedError(msg);
    throw IoError(msg);
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw InputError("CSV line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

}  // namespace

CsvTable parse_csv(std::string_view content) {
  CsvTable table;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto eol = content.find('\n', pos);
    if (eol == std::string_view::npos) eol = content.size();
    std::string_view line = content.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_csv_line(line, line_no);
    if (!header_seen) {
      table.header = std::move(fields);
      header_seen = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw InputError("CSV line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (!header_seen) throw InputError("CSV input is empty");
  return table;
}

double parse_csv_number(const std::string& field, std::size_t line_no, std::string_view column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InputError("CSV line " + std::to_string(line_no) + ": " + std::string(column) + " '" +
                     field + "' is not a number");
  }
  return v;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<PronounProbs> parse_probability_csv(std::string_view content) {
  const CsvTable table = parse_csv(content);
  const std::vector<std::string> expected = {"prompt_id", "variant", "p_male", "p_female",
                                             "p_neutral"};
  if (table.header != expected) {
    throw InputError("probability CSV: expected header prompt_id,variant,p_male,p_female,p_neutral");
  }
  std::vector<PronounProbs> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& f = table.rows[r];
    const auto line_no = table.line_numbers[r];
    PronounProbs p;
    p.prompt_id = f[0];
    if (p.prompt_id.empty()) throw InputError("CSV line " + std::to_string(line_no) + ": empty prompt_id");
    try {
      p.variant = prompt_variant_from_string(f[1]);
    } catch (const InputError& e) {
      throw InputError("CSV line " + std::to_string(line_no) + ": " + e.what());
    }
    p.p_male = parse_csv_number(f[2], line_no, "p_male");
    p.p_female = parse_csv_number(f[3], line_no, "p_female");
    if (!f[4].empty()) p.p_neutral = parse_csv_number(f[4], line_no, "p_neutral");
    out.push_back(std::move(p));
  }
  if (out.empty()) throw InputError("probability CSV has no records");
  return out;
}

std::vector<PronounProbs> read_probability_csv(const std::filesystem::path& path) {
  return parse_probability_csv(read_text_file(path));
}

std::string format_probability_csv(const std::vector<PronounProbs>& records) {
  std::string out = "prompt_id,variant,p_male,p_female,p_neutral\n";
  for (const auto& p : records) {
    out += csv_escape(p.prompt_id) + "," + std::string(to_string(p.variant)) + "," +
           format_number(p.p_male) + "," + format_number(p.p_female) + "," +
           (p.p_neutral ? format_number(*p.p_neutral) : std::string{}) + "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gprobe
