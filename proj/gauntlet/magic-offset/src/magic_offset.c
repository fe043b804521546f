#include <stdio.h>
#include <string.h>

/* 8-byte tag, then the magic word */
int main(void) {
  unsigned char buf[128] = {0};
  size_t n = fread(buf, 1, sizeof(buf), stdin);
  if (n < 12)
    return 1;
  if (memcmp(buf + 8, "\xde\xad\xbe\xef", 4) == 0) {
    puts("magic at offset 8");
    return 0;
  }
  return 2;
}
