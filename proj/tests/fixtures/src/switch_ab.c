#include <stdio.h>

int main(void) {
  int ch = getchar();
  switch (ch) {
    case 'a':
      return 1;
    case 'b':
      return 2;
    default:
      return 0;
  }
}
