#include "ipu/csp/crc32.hpp"

#include "ipu/kernels/kernels.hpp"

namespace ipu::csp {

uint32_t crc32_of(ByteView data) {
    return kernels::crc32_update(0xFFFFFFFFu, data.data(), data.size()) ^ 0xFFFFFFFFu;
}

void Crc32::update(ByteView data) {
    reg_ = kernels::crc32_update(reg_, data.data(), data.size());
}

uint32_t Crc32::finish() const {
    return reg_ ^ 0xFFFFFFFFu;
}

}  // namespace ipu::csp
