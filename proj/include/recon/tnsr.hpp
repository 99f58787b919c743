#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace recon {

// Little-endian binary tensor container:
//   magic "TNSR", version u8 = 1, dtype u8, rank u8, dims rank x u32,
//   payload row-major.
enum class TnsrType : uint8_t {
    f32 = 0,
    f64 = 1,
    u8 = 2,
    i32 = 3,
};

struct Tnsr {
    TnsrType dtype = TnsrType::f64;
    std::vector<uint32_t> dims;
    // Payloads are held in the widest type and narrowed on write.
    std::vector<double> f;   // f32/f64
    std::vector<uint8_t> u;  // u8
    std::vector<int32_t> i;  // i32

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return dims.empty() ? 0 : n;
    }
};

void write_tnsr(std::ostream& out, const Tnsr& t);
Tnsr read_tnsr(std::istream& in);

void save_tnsr(const std::string& path, const Tnsr& t);
Tnsr load_tnsr(const std::string& path);

// Shorthand constructors.
Tnsr tnsr_f32(std::vector<uint32_t> dims, std::vector<double> values);
Tnsr tnsr_f64(std::vector<uint32_t> dims, std::vector<double> values);
Tnsr tnsr_u8(std::vector<uint32_t> dims, std::vector<uint8_t> values);
Tnsr tnsr_i32(std::vector<uint32_t> dims, std::vector<int32_t> values);

}  // namespace recon
