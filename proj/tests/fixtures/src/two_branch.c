#include <stdio.h>

int main(void) {
  int c = getchar();
  if (c & 1)
    return 1;
  return 0;
}
